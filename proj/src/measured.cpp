#include "freqlab/measured.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>

#include "freqlab/errors.hpp"
#include "freqlab/parallel.hpp"

namespace freqlab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\"");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_number(const std::string& s) {
  double x = 0.0;
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, x);
  if (r.ec != std::errc() || r.ptr != end || !std::isfinite(x)) return std::nullopt;
  return x;
}

// Reads exactly n digits at s[pos].
std::optional<int> digits(const std::string& s, std::size_t pos, std::size_t n) {
  if (pos + n > s.size()) return std::nullopt;
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

}  // namespace

std::optional<double> parse_timestamp(const std::string& text) {
  const std::string s = trim(text);
  if (s.empty()) return std::nullopt;
  if (auto v = parse_number(s)) return v;

  // YYYY-MM-DD[T ]HH:MM:SS
  if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' ||
      s[16] != ':')
    return std::nullopt;
  const auto y = digits(s, 0, 4), mo = digits(s, 5, 2), d = digits(s, 8, 2);
  const auto hh = digits(s, 11, 2), mm = digits(s, 14, 2), ss = digits(s, 17, 2);
  if (!y || !mo || !d || !hh || !mm || !ss) return std::nullopt;
  using namespace std::chrono;
  const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)}, day{static_cast<unsigned>(*d)}};
  if (!ymd.ok() || *hh > 23 || *mm > 59 || *ss > 60) return std::nullopt;
  double t = static_cast<double>(sys_days{ymd}.time_since_epoch().count()) * 86400.0 + *hh * 3600.0 +
             *mm * 60.0 + *ss;
  std::size_t pos = 19;
  if (pos < s.size() && (s[pos] == '.' || s[pos] == ',')) {
    std::size_t end = pos + 1;
    while (end < s.size() && s[end] >= '0' && s[end] <= '9') ++end;
    if (end == pos + 1) return std::nullopt;
    t += *parse_number("0." + s.substr(pos + 1, end - pos - 1));
    pos = end;
  }
  if (pos == s.size()) return t;
  if (s[pos] == 'Z' && pos + 1 == s.size()) return t;
  if ((s[pos] == '+' || s[pos] == '-') && s.size() == pos + 6 && s[pos + 3] == ':') {
    const auto oh = digits(s, pos + 1, 2), om = digits(s, pos + 4, 2);
    if (!oh || !om) return std::nullopt;
    const double offset = *oh * 3600.0 + *om * 60.0;
    return s[pos] == '+' ? t - offset : t + offset;
  }
  return std::nullopt;
}

MeasuredSeries parse_measured(std::istream& in, const std::string& source, double f0_hz) {
  MeasuredSeries m;
  m.source = source;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto comma = line.find(',');
    std::optional<double> ts, f;
    if (comma != std::string::npos) {
      ts = parse_timestamp(line.substr(0, comma));
      f = parse_number(trim(line.substr(comma + 1)));
    }
    if (first) {
      first = false;
      // A leading row whose timestamp field is not a time is the header.
      if (!ts) continue;
    }
    ++m.data_rows;
    if (!ts || !f || (!m.timestamps.empty() && *ts < m.timestamps.back())) {
      ++m.bad_rows;
      continue;
    }
    if (std::abs(*f - f0_hz) > 2.0) {
      ++m.sanity_violations;
      continue;
    }
    m.timestamps.push_back(*ts);
    m.frequency_hz.push_back(*f);
  }
  if (m.timestamps.size() >= 2) {
    std::vector<double> diffs(m.timestamps.size() - 1);
    for (std::size_t i = 0; i + 1 < m.timestamps.size(); ++i) diffs[i] = m.timestamps[i + 1] - m.timestamps[i];
    std::sort(diffs.begin(), diffs.end());
    const std::size_t h = diffs.size() / 2;
    const double median = diffs.size() % 2 ? diffs[h] : 0.5 * (diffs[h - 1] + diffs[h]);
    if (median > 0.0) m.cadence = median;
    for (std::size_t i = 0; i + 1 < m.timestamps.size(); ++i)
      if (m.timestamps[i + 1] - m.timestamps[i] > 1.5 * m.cadence)
        m.gaps.push_back({m.timestamps[i], m.timestamps[i + 1]});
  }
  return m;
}

MeasuredAnalysis analyze_measured(const MeasuredSeries& m, Window window, double f0_hz, std::size_t bins,
                                  std::optional<double> d_za_hz) {
  if (m.timestamps.empty()) throw EmptyInput("analyze: no valid samples in " + m.source);
  MeasuredAnalysis a;
  a.window = window;
  std::vector<double> dev(m.frequency_hz.size());
  for (std::size_t i = 0; i < dev.size(); ++i) dev[i] = m.frequency_hz[i] - f0_hz;

  const double t0 = m.timestamps.front();
  const double span_total = m.timestamps.back() - t0 + m.cadence;
  const double span = window_seconds(window, span_total);
  const double origin = window == Window::Full ? t0 : std::floor(t0 / span) * span;
  std::vector<std::int64_t> keys(dev.size());
  for (std::size_t i = 0; i < dev.size(); ++i)
    keys[i] = window == Window::Full ? 0 : static_cast<std::int64_t>(std::floor((m.timestamps[i] - origin) / span));

  std::tie(a.lo, a.hi) = default_range(dev, d_za_hz.value_or(0.0));
  a.histograms = window_aggregate_keyed(dev, keys, Unit::Hz, origin, span, bins, a.lo, a.hi);

  const std::size_t nw = a.histograms.windows.size();
  a.windows.resize(nw);
  std::vector<double> sums(nw, 0.0);
  std::vector<std::size_t> counts(nw, 0);
  {
    std::size_t w = 0;
    std::int64_t current = keys.empty() ? 0 : keys.front();
    for (std::size_t i = 0; i < dev.size(); ++i) {
      if (keys[i] != current) {
        current = keys[i];
        ++w;
      }
      sums[w] += dev[i];
      ++counts[w];
    }
  }
  parallel_for(nw, [&](std::size_t w) {
    a.windows[w].start = a.histograms.window_start[w];
    a.windows[w].count = counts[w];
    a.windows[w].mean_hz = counts[w] ? sums[w] / static_cast<double>(counts[w]) : 0.0;
    a.windows[w].modality = modality(a.histograms.windows[w]);
  });
  a.combined = modality(a.histograms.combined);
  if (d_za_hz) {
    std::size_t out = 0;
    for (double v : dev) out += std::abs(v) > *d_za_hz;
    a.fraction_outside = static_cast<double>(out) / static_cast<double>(dev.size());
  }
  return a;
}

}  // namespace freqlab
