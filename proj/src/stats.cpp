#include "freqlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <ostream>

#include "freqlab/errors.hpp"

namespace freqlab {

const char* unit_name(Unit u) noexcept { return u == Unit::Hz ? "hz" : "pu"; }

void SampleSeries::validate() const {
  if (!(cadence > 0.0)) throw InvalidArgument("SampleSeries: cadence must be > 0");
}

SampleSeries sample_series(const Trajectory& traj, Eigen::Index component, double cadence, Unit unit) {
  if (traj.size() < 2) throw InvalidArgument("sample_series: trajectory needs at least two stamps");
  if (component < 0 || component >= traj.states.rows())
    throw InvalidArgument("sample_series: component out of range");
  const double step = traj.t(1) - traj.t(0);
  if (!(cadence >= step * (1.0 - 1e-9)))
    throw InvalidArgument("sample_series: cadence shorter than the trajectory step");
  const double ratio = cadence / step;
  const double m = std::round(ratio);
  if (std::abs(ratio - m) > 1e-9 * m)
    throw InvalidArgument("sample_series: cadence is not an integer multiple of the step");
  const auto stride = static_cast<Eigen::Index>(m);
  SampleSeries s;
  s.start_time = traj.t(0);
  s.cadence = cadence;
  s.unit = unit;
  // Half-open [t0, t_end): a one-day trajectory yields exactly 86400 samples
  // at 1 s, the closing stamp being the first sample of the next day.
  const Eigen::Index n = (traj.size() - 1) / stride;
  s.values.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) s.values.push_back(traj.states(component, k * stride));
  return s;
}

std::uint64_t Histogram::accepted() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

Histogram build_histogram(const std::vector<double>& values, Unit unit, std::size_t n_bins, double lo,
                          double hi) {
  if (n_bins < 2) throw InvalidArgument("build_histogram: n_bins must be >= 2");
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw InvalidArgument("build_histogram: range must satisfy lo < hi");
  if (values.empty()) throw EmptyInput("build_histogram: empty series");
  Histogram h;
  h.unit = unit;
  h.edges.resize(n_bins + 1);
  const double w = (hi - lo) / static_cast<double>(n_bins);
  for (std::size_t i = 0; i <= n_bins; ++i) h.edges[i] = lo + w * static_cast<double>(i);
  h.edges[n_bins] = hi;
  h.counts.assign(n_bins, 0);
  for (double x : values) {
    if (x < lo || std::isnan(x)) {
      ++h.underflow;
    } else if (x > hi) {
      ++h.overflow;
    } else {
      auto i = static_cast<std::size_t>((x - lo) / w);
      if (i >= n_bins) i = n_bins - 1;
      // Guard the floating division against landing one bin off near edges.
      while (i > 0 && x < h.edges[i]) --i;
      while (i + 1 < n_bins && x >= h.edges[i + 1]) ++i;
      ++h.counts[i];
    }
  }
  return h;
}

Histogram build_histogram(const SampleSeries& s, std::size_t n_bins, double lo, double hi) {
  s.validate();
  return build_histogram(s.values, s.unit, n_bins, lo, hi);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) throw EmptyInput("mean_of: empty input");
  double m = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) m += (v[i] - m) / static_cast<double>(i + 1);
  return m;
}

double variance_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / static_cast<double>(v.size());
}

std::pair<double, double> default_range(const std::vector<double>& values, double d_za) {
  const double sd = values.empty() ? 0.0 : std::sqrt(variance_of(values));
  double half = 3.0 * std::max(d_za, 2.0 * sd);
  if (!(half > 0.0)) half = 1e-3;
  return {-half, half};
}

Histogram normalize_density(const Histogram& h) {
  const std::uint64_t n = h.accepted();
  if (n == 0) throw EmptyInput("normalize_density: histogram has no accepted samples");
  Histogram out = h;
  std::vector<double> d(h.bins());
  for (std::size_t i = 0; i < h.bins(); ++i)
    d[i] = static_cast<double>(h.counts[i]) / (static_cast<double>(n) * h.width(i));
  out.density = std::move(d);
  return out;
}

const char* verdict_name(Verdict v) noexcept {
  switch (v) {
    case Verdict::Unimodal: return "unimodal";
    case Verdict::Bimodal: return "bimodal";
    default: return "indeterminate";
  }
}

namespace {

struct BinnedMoments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;  // central moments divided by n
  double m3 = 0.0;
  double m4 = 0.0;
};

BinnedMoments binned_moments(const Histogram& h) {
  BinnedMoments b;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    const double c = static_cast<double>(h.counts[i]);
    b.n += c;
    b.mean += c * h.center(i);
  }
  if (b.n == 0.0) return b;
  b.mean /= b.n;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    const double c = static_cast<double>(h.counts[i]);
    const double d = h.center(i) - b.mean;
    b.m2 += c * d * d;
    b.m3 += c * d * d * d;
    b.m4 += c * d * d * d * d;
  }
  b.m2 /= b.n;
  b.m3 /= b.n;
  b.m4 /= b.n;
  return b;
}

double bc_from_moments(double n, double m2, double m3, double m4) {
  if (n < 4.0) return 0.0;
  if (!(m2 > 0.0)) return 0.0;  // point mass: no spread, treated as unimodal
  const double g1 = m3 / std::pow(m2, 1.5);
  const double g2 = m4 / (m2 * m2) - 3.0;
  const double skew = g1 * std::sqrt(n * (n - 1.0)) / (n - 2.0);
  const double kurt = ((n + 1.0) * g2 + 6.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0));
  return (skew * skew + 1.0) / (kurt + 3.0 * (n - 1.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0)));
}

// Topographic prominence of the peak at i: height above the higher of the two
// lowest points reached before climbing above the peak on either side.
double prominence(const std::vector<double>& y, std::size_t i) {
  double left_min = y[i];
  for (std::size_t j = i; j > 0 && y[j - 1] <= y[i];) left_min = std::min(left_min, y[--j]);
  double right_min = y[i];
  for (std::size_t j = i; j + 1 < y.size() && y[j + 1] <= y[i];) right_min = std::min(right_min, y[++j]);
  return y[i] - std::max(left_min, right_min);
}

}  // namespace

double bimodality_coefficient(const Histogram& h) {
  const auto b = binned_moments(h);
  return bc_from_moments(b.n, b.m2, b.m3, b.m4);
}

double bimodality_coefficient(const std::vector<double>& values) {
  const double n = static_cast<double>(values.size());
  if (values.size() < 4) return 0.0;
  const double m = mean_of(values);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : values) {
    const double d = x - m;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  return bc_from_moments(n, m2 / n, m3 / n, m4 / n);
}

std::vector<double> smoothed_density(const Histogram& h, double* bandwidth_out) {
  const std::uint64_t n = h.accepted();
  if (n == 0) throw EmptyInput("smoothed_density: histogram has no accepted samples");
  const std::vector<double> dens = normalize_density(h).density.value();
  const auto b = binned_moments(h);
  const double bw = 1.06 * std::sqrt(b.m2) * std::pow(static_cast<double>(n), -0.2);
  if (bandwidth_out) *bandwidth_out = bw;
  if (!(bw > 0.0)) return dens;
  const std::size_t m = h.bins();
  std::vector<double> sm(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (dens[j] == 0.0) continue;
      const double u = (h.center(i) - h.center(j)) / bw;
      sm[i] += dens[j] * h.width(j) * std::exp(-0.5 * u * u);
    }
  double mass = 0.0;
  for (std::size_t i = 0; i < m; ++i) mass += sm[i] * h.width(i);
  if (mass > 0.0)
    for (double& v : sm) v /= mass;
  return sm;
}

ModalityReport modality(const Histogram& h, const ModalityThresholds& th) {
  ModalityReport r;
  r.unit = h.unit;
  r.sample_count = static_cast<std::size_t>(h.accepted());
  if (r.sample_count == 0) return r;
  const auto sm = smoothed_density(h, &r.bandwidth);
  const double top = *std::max_element(sm.begin(), sm.end());
  for (std::size_t i = 1; i + 1 < sm.size(); ++i) {
    if (sm[i] > sm[i - 1] && sm[i] > sm[i + 1] && prominence(sm, i) >= th.prominence_fraction * top)
      r.peak_locations.push_back(h.center(i));
  }
  if (r.peak_locations.empty())
    r.peak_locations.push_back(h.center(static_cast<std::size_t>(
        std::distance(sm.begin(), std::max_element(sm.begin(), sm.end())))));
  r.peak_count = r.peak_locations.size();
  r.bimodality_coefficient = bimodality_coefficient(h);
  if (r.sample_count < th.min_samples)
    r.verdict = Verdict::Indeterminate;
  else if (r.peak_count == 1 && r.bimodality_coefficient <= th.unimodal_bc_max)
    r.verdict = Verdict::Unimodal;
  else if (r.peak_count >= 2 && r.bimodality_coefficient > th.bimodal_bc_min)
    r.verdict = Verdict::Bimodal;
  else
    r.verdict = Verdict::Indeterminate;
  return r;
}

double flatness_ratio(const Histogram& h, double lo, double hi) {
  const auto sm = smoothed_density(h);
  double mn = INFINITY, mx = 0.0;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    const double c = h.center(i);
    if (c < lo || c > hi) continue;
    mn = std::min(mn, sm[i]);
    mx = std::max(mx, sm[i]);
  }
  if (!(mx > 0.0)) return 0.0;
  return mn / mx;
}

double window_seconds(Window w, double series_span) noexcept {
  switch (w) {
    case Window::Hourly: return 3600.0;
    case Window::Daily: return 86400.0;
    default: return series_span;
  }
}

Window parse_window(const std::string& name) {
  if (name == "hourly") return Window::Hourly;
  if (name == "daily") return Window::Daily;
  if (name == "full") return Window::Full;
  throw InvalidArgument("unknown window '" + name + "' (expected hourly, daily or full)");
}

const char* window_name(Window w) noexcept {
  switch (w) {
    case Window::Hourly: return "hourly";
    case Window::Daily: return "daily";
    default: return "full";
  }
}

WindowedHistograms window_aggregate_keyed(const std::vector<double>& values,
                                          const std::vector<std::int64_t>& keys, Unit unit,
                                          double origin, double span, std::size_t n_bins, double lo,
                                          double hi) {
  if (values.size() != keys.size()) throw InvalidArgument("window_aggregate: keys and values differ in length");
  if (values.empty()) throw EmptyInput("window_aggregate: empty series");
  std::map<std::int64_t, std::vector<double>> groups;
  for (std::size_t i = 0; i < values.size(); ++i) groups[keys[i]].push_back(values[i]);
  WindowedHistograms out;
  out.combined = build_histogram(std::vector<double>{lo}, unit, n_bins, lo, hi);
  std::fill(out.combined.counts.begin(), out.combined.counts.end(), 0);
  for (const auto& [key, vals] : groups) {
    out.window_start.push_back(origin + span * static_cast<double>(key));
    out.windows.push_back(build_histogram(vals, unit, n_bins, lo, hi));
    const Histogram& w = out.windows.back();
    for (std::size_t i = 0; i < n_bins; ++i) out.combined.counts[i] += w.counts[i];
    out.combined.underflow += w.underflow;
    out.combined.overflow += w.overflow;
  }
  return out;
}

WindowedHistograms window_aggregate(const SampleSeries& s, Window window, std::size_t n_bins,
                                    double lo, double hi) {
  s.validate();
  if (s.values.empty()) throw EmptyInput("window_aggregate: empty series");
  const double span_total = s.cadence * static_cast<double>(s.count());
  const double span = window_seconds(window, span_total);
  if (span > span_total * (1.0 + 1e-12))
    throw InvalidArgument(std::string("window_aggregate: ") + window_name(window) +
                          " window is longer than the series");
  const auto per = static_cast<std::size_t>(std::llround(span / s.cadence));
  std::vector<std::int64_t> keys(s.count());
  for (std::size_t i = 0; i < s.count(); ++i) keys[i] = static_cast<std::int64_t>(i / per);
  return window_aggregate_keyed(s.values, keys, s.unit, s.start_time, span, n_bins, lo, hi);
}

MannKendall mann_kendall(const std::vector<double>& x) {
  MannKendall r;
  const std::size_t n = x.size();
  if (n < 2) return r;
  long long s = 0;
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) s += (x[j] > x[i]) - (x[j] < x[i]);
  std::map<double, int> ties;
  for (double v : x) ++ties[v];
  const double nd = static_cast<double>(n);
  double var = nd * (nd - 1.0) * (2.0 * nd + 5.0);
  for (const auto& [v, t] : ties) var -= t * (t - 1.0) * (2.0 * t + 5.0);
  var /= 18.0;
  r.s = static_cast<double>(s);
  if (var > 0.0) {
    if (s > 0) r.z = (r.s - 1.0) / std::sqrt(var);
    if (s < 0) r.z = (r.s + 1.0) / std::sqrt(var);
  }
  r.p_increasing = 0.5 * std::erfc(r.z / std::sqrt(2.0));
  r.p_decreasing = 0.5 * std::erfc(-r.z / std::sqrt(2.0));
  return r;
}

DeadbandStats deadband_stats(const SampleSeries& s, double d_za, double trend_window_s) {
  s.validate();
  if (!(d_za >= 0.0)) throw InvalidArgument("deadband_stats: d_za must be >= 0");
  DeadbandStats r;
  if (s.values.empty()) return r;
  auto region = [d_za](double v) { return v > d_za ? 1 : (v < -d_za ? -1 : 0); };
  std::uint64_t outside = 0;
  int prev = region(s.values[0]);
  for (std::size_t i = 0; i < s.count(); ++i) {
    const int reg = region(s.values[i]);
    if (reg != 0) ++outside;
    if (i > 0 && reg != prev) ++r.crossing_count;
    prev = reg;
  }
  r.fraction_outside = static_cast<double>(outside) / static_cast<double>(s.count());
  auto per = static_cast<std::size_t>(std::llround(trend_window_s / s.cadence));
  if (per == 0 || per > s.count()) per = s.count();
  for (std::size_t start = 0; start + per <= s.count(); start += per) {
    std::size_t out = 0;
    for (std::size_t i = start; i < start + per; ++i) out += region(s.values[i]) != 0;
    r.window_fractions.push_back(static_cast<double>(out) / static_cast<double>(per));
  }
  r.trend = mann_kendall(r.window_fractions);
  return r;
}

std::vector<WindowMoments> moment_series(const SampleSeries& s, double window_s) {
  s.validate();
  if (window_s < 10.0 * s.cadence * (1.0 - 1e-12))
    throw InvalidArgument("moment_series: window must be >= 10 samples");
  const auto per = static_cast<std::size_t>(std::llround(window_s / s.cadence));
  std::vector<WindowMoments> out;
  for (std::size_t start = 0; start + per <= s.count(); start += per) {
    const std::vector<double> chunk(s.values.begin() + static_cast<std::ptrdiff_t>(start),
                                    s.values.begin() + static_cast<std::ptrdiff_t>(start + per));
    out.push_back({s.time_at(start), mean_of(chunk), variance_of(chunk), per});
  }
  return out;
}

void write_histogram_csv(std::ostream& os, const Histogram& h) {
  os << "bin_left,bin_right,count,density\n";
  char buf[96];
  for (std::size_t i = 0; i < h.bins(); ++i) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%llu,", h.edges[i], h.edges[i + 1],
                  static_cast<unsigned long long>(h.counts[i]));
    os << buf;
    if (h.density) {
      std::snprintf(buf, sizeof buf, "%.10g", (*h.density)[i]);
      os << buf;
    }
    os << '\n';
  }
}

void write_series_csv(std::ostream& os, const SampleSeries& s) {
  os << (s.unit == Unit::Hz ? "t_s,delta_f_hz\n" : "t_s,delta_omega_pu\n");
  char buf[64];
  for (std::size_t i = 0; i < s.count(); ++i) {
    std::snprintf(buf, sizeof buf, "%.10g,%.17g\n", s.time_at(i), s.values[i]);
    os << buf;
  }
}

}  // namespace freqlab
