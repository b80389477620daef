#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "freqlab/linear_sde.hpp"

namespace freqlab {

enum class Unit { Hz, Pu };

const char* unit_name(Unit u) noexcept;

/// How a series was produced. compare_with_oracle refuses series whose run
/// had nonlinear elements active.
struct SeriesOrigin {
  std::string label;
  std::uint64_t deadband_crossings = 0;
  bool deadbands_present = false;
  bool agc_enabled = false;
  bool synthetic_inertia = false;
  bool drifting_load = false;
};

struct SampleSeries {
  double start_time = 0.0;  ///< s
  double cadence = 1.0;     ///< s
  std::vector<double> values;
  Unit unit = Unit::Hz;
  std::optional<SeriesOrigin> origin;

  std::size_t count() const noexcept { return values.size(); }
  double time_at(std::size_t i) const noexcept { return start_time + cadence * static_cast<double>(i); }
  void validate() const;
};

/// Picks the state at every cadence boundary of the trajectory grid over the
/// half-open span [t0, t_end). The cadence must be an integer multiple of the
/// trajectory step.
SampleSeries sample_series(const Trajectory& traj, Eigen::Index component, double cadence,
                           Unit unit = Unit::Pu);

struct Histogram {
  std::vector<double> edges;
  std::vector<std::uint64_t> counts;
  std::uint64_t underflow = 0;
  std::uint64_t overflow = 0;
  std::optional<std::vector<double>> density;
  Unit unit = Unit::Hz;

  std::size_t bins() const noexcept { return counts.size(); }
  double width(std::size_t i) const noexcept { return edges[i + 1] - edges[i]; }
  double center(std::size_t i) const noexcept { return 0.5 * (edges[i] + edges[i + 1]); }
  std::uint64_t accepted() const noexcept;
  std::uint64_t total() const noexcept { return accepted() + underflow + overflow; }
};

/// Equal-width bins over [lo, hi]; the right edge belongs to the last bin and
/// samples outside the range go to the underflow/overflow tallies.
Histogram build_histogram(const SampleSeries& s, std::size_t n_bins, double lo, double hi);
Histogram build_histogram(const std::vector<double>& values, Unit unit, std::size_t n_bins, double lo,
                          double hi);

/// ±3·max(d_za, 2σ̂): the shared default range.
std::pair<double, double> default_range(const std::vector<double>& values, double d_za);

/// density[i] = counts[i]/(Σcounts·width[i]).
Histogram normalize_density(const Histogram& h);

enum class Verdict { Unimodal, Bimodal, Indeterminate };
const char* verdict_name(Verdict v) noexcept;

struct ModalityThresholds {
  std::size_t min_samples = 1000;
  double prominence_fraction = 0.05;
  double unimodal_bc_max = 5.0 / 9.0;
  double bimodal_bc_min = 0.40;
};

struct ModalityReport {
  std::size_t sample_count = 0;
  std::size_t peak_count = 0;
  std::vector<double> peak_locations;
  double bimodality_coefficient = 0.0;
  double bandwidth = 0.0;
  Verdict verdict = Verdict::Indeterminate;
  Unit unit = Unit::Hz;
};

/// Gaussian-kernel smoothing of the binned density on the bin centres, with
/// Silverman bandwidth 1.06·σ̂·N^{−1/5}; renormalized to unit mass.
std::vector<double> smoothed_density(const Histogram& h, double* bandwidth_out = nullptr);

/// Peak count on the smoothed density, bimodality coefficient on the binned
/// data, and the calibrated verdict.
ModalityReport modality(const Histogram& h, const ModalityThresholds& th = {});

/// min/max of the smoothed density over bin centres in [lo, hi].
double flatness_ratio(const Histogram& h, double lo, double hi);

/// Sample bimodality coefficient (G1² + 1)/(G2 + 3(n−1)²/((n−2)(n−3))) with
/// bias-corrected skewness G1 and excess kurtosis G2.
double bimodality_coefficient(const std::vector<double>& values);
double bimodality_coefficient(const Histogram& h);

enum class Window { Hourly, Daily, Full };
double window_seconds(Window w, double series_span) noexcept;
Window parse_window(const std::string& name);
const char* window_name(Window w) noexcept;

struct WindowedHistograms {
  std::vector<double> window_start;  ///< s
  std::vector<Histogram> windows;
  Histogram combined;
};

/// Histograms of consecutive windows with shared edges; combined is the
/// bin-wise sum (a trailing partial window is kept as its own window).
WindowedHistograms window_aggregate(const SampleSeries& s, Window window, std::size_t n_bins,
                                    double lo, double hi);

/// Keyed core used for gappy measured data: values[i] falls into the window
/// with index keys[i]; window_start[k] = origin + k·span for each distinct key.
WindowedHistograms window_aggregate_keyed(const std::vector<double>& values,
                                          const std::vector<std::int64_t>& keys, Unit unit,
                                          double origin, double span, std::size_t n_bins, double lo,
                                          double hi);

struct MannKendall {
  double s = 0.0;
  double z = 0.0;
  double p_increasing = 1.0;  ///< one-sided p-value for an upward trend
  double p_decreasing = 1.0;
};

MannKendall mann_kendall(const std::vector<double>& x);

struct DeadbandStats {
  double fraction_outside = 0.0;
  std::uint64_t crossing_count = 0;
  std::vector<double> window_fractions;
  MannKendall trend;
};

/// Fraction with |v| > d_za, changes of region {−1, 0, +1} between
/// consecutive samples, and per-window fractions (default 6 h).
DeadbandStats deadband_stats(const SampleSeries& s, double d_za, double trend_window_s = 21600.0);

struct WindowMoments {
  double t_start = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  std::size_t count = 0;
};

/// Non-overlapping window means and (population) variances.
std::vector<WindowMoments> moment_series(const SampleSeries& s, double window_s);

double mean_of(const std::vector<double>& v);
double variance_of(const std::vector<double>& v);  ///< population variance

void write_histogram_csv(std::ostream& os, const Histogram& h);
void write_series_csv(std::ostream& os, const SampleSeries& s);

}  // namespace freqlab
