#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "freqlab/stats.hpp"

namespace freqlab {

struct Gap {
  double from = 0.0;  ///< last timestamp before the gap (epoch s)
  double to = 0.0;    ///< first timestamp after it
};

/// Measured frequency samples from a `timestamp,frequency_hz` CSV.
struct MeasuredSeries {
  std::string source;
  std::vector<double> timestamps;  ///< UTC epoch seconds, nondecreasing
  std::vector<double> frequency_hz;
  std::size_t data_rows = 0;       ///< rows after the optional header
  std::size_t bad_rows = 0;        ///< unparseable or out-of-order rows
  std::size_t sanity_violations = 0;  ///< outside [f0 − 2, f0 + 2] Hz; excluded
  double cadence = 1.0;            ///< median spacing (s)
  std::vector<Gap> gaps;           ///< spacings above 1.5 × cadence

  double bad_fraction() const noexcept {
    return data_rows == 0 ? 1.0 : static_cast<double>(bad_rows) / static_cast<double>(data_rows);
  }
};

/// Integer or decimal epoch seconds, or ISO-8601 `YYYY-MM-DD[T ]HH:MM:SS[.f][Z|±HH:MM]`.
std::optional<double> parse_timestamp(const std::string& text);

MeasuredSeries parse_measured(std::istream& in, const std::string& source, double f0_hz = 60.0);

struct WindowVerdict {
  double start = 0.0;
  std::size_t count = 0;
  double mean_hz = 0.0;  ///< mean deviation from f0
  ModalityReport modality;
};

struct MeasuredAnalysis {
  Window window = Window::Hourly;
  double lo = 0.0;
  double hi = 0.0;
  WindowedHistograms histograms;
  std::vector<WindowVerdict> windows;
  ModalityReport combined;
  std::optional<double> fraction_outside;  ///< when a dead-band was given
};

/// Windows are aligned to multiples of the window length in epoch time
/// (whole-series for Window::Full); gaps are never interpolated.
MeasuredAnalysis analyze_measured(const MeasuredSeries& m, Window window, double f0_hz, std::size_t bins,
                                  std::optional<double> d_za_hz);

}  // namespace freqlab
