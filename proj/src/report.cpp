#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "freqlab/scenario.hpp"
#include "json.hpp"

namespace freqlab {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct PowerStats {
  double mean = 0.0;
  double std = 0.0;
  double bound = 0.0;  // 3·std/√N
};

PowerStats power_stats(const std::vector<double>& p) {
  PowerStats s;
  if (p.empty()) return s;
  s.mean = mean_of(p);
  s.std = std::sqrt(variance_of(p));
  s.bound = 3.0 * s.std / std::sqrt(static_cast<double>(p.size()));
  return s;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ";" : "") + fmt(v[i]);
  return out;
}

}  // namespace

void write_modality_text(std::ostream& os, const ModalityReport& m) {
  os << "unit=" << unit_name(m.unit) << "\n"
     << "sample_count=" << m.sample_count << "\n"
     << "peak_count=" << m.peak_count << "\n"
     << "peak_locations=" << join(m.peak_locations) << "\n"
     << "bimodality_coefficient=" << fmt(m.bimodality_coefficient) << "\n"
     << "bandwidth=" << fmt(m.bandwidth) << "\n"
     << "verdict=" << verdict_name(m.verdict) << "\n";
}

void write_report_text(std::ostream& os, const RunResult& r) {
  const auto& sc = r.scenario;
  const auto& v = r.series.values;
  os << "scenario=" << sc.label << "\n"
     << "seed=" << sc.seed << "\n"
     << "duration_s=" << fmt(sc.duration_s) << "\n"
     << "dt_s=" << fmt(sc.dt_s) << "\n"
     << "warmup_s=" << fmt(sc.warmup_s) << "\n"
     << "samples=" << r.series.count() << "\n"
     << "h_system_s=" << fmt(sc.h_system()) << "\n"
     << "d_l_system_pu=" << fmt(sc.d_l_system()) << "\n"
     << "mean_hz=" << fmt(v.empty() ? 0.0 : mean_of(v)) << "\n"
     << "std_hz=" << fmt(v.empty() ? 0.0 : std::sqrt(variance_of(v))) << "\n"
     << "d_za_hz=" << fmt(r.d_za_hz) << "\n"
     << "fraction_outside_deadband=" << fmt(r.deadband.fraction_outside) << "\n"
     << "deadband_crossings=" << r.deadband.crossing_count << "\n"
     << "deadband_window_fractions=" << join(r.deadband.window_fractions) << "\n"
     << "deadband_trend_p_increasing=" << fmt(r.deadband.trend.p_increasing) << "\n"
     << "governor_wear_events=" << r.summary.wear_events << "\n"
     << "histogram_underflow=" << r.histogram.underflow << "\n"
     << "histogram_overflow=" << r.histogram.overflow << "\n"
     << "verdict=" << verdict_name(r.modality.verdict) << "\n"
     << "peak_locations_hz=" << join(r.modality.peak_locations) << "\n"
     << "bimodality_coefficient=" << fmt(r.modality.bimodality_coefficient) << "\n";
  if (sc.synthetic_inertia) {
    const auto ps = power_stats(r.summary.si_power_samples);
    os << "si_energy_min_mj=" << fmt(r.summary.e_min_mj) << "\n"
       << "si_energy_max_mj=" << fmt(r.summary.e_max_mj) << "\n"
       << "si_energy_final_mj=" << fmt(r.summary.e_final_mj) << "\n"
       << "si_power_mean_mw=" << fmt(ps.mean) << "\n"
       << "si_power_std_mw=" << fmt(ps.std) << "\n"
       << "si_power_neutral=" << (std::abs(ps.mean) <= ps.bound ? "true" : "false") << "\n";
  }
  if (r.comparison) {
    os << "oracle_sigma_pu=" << fmt(r.comparison->sigma) << "\n";
    for (const auto& c : r.comparison->criteria)
      os << "oracle_" << c.name << "=" << fmt(c.empirical) << " analytic=" << fmt(c.analytic)
         << " rel_error=" << fmt(c.relative_error) << " threshold=" << fmt(c.threshold)
         << " pass=" << (c.pass ? "true" : "false") << "\n";
    for (const auto& n : r.comparison->notes) os << "oracle_note=" << n << "\n";
  } else {
    os << "oracle_comparison=skipped (nonlinear elements active)\n";
  }
}

void write_report_json(std::ostream& os, const RunResult& r) {
  using nlohmann::json;
  const auto& sc = r.scenario;
  const auto& v = r.series.values;
  json j;
  j["scenario"] = sc.label;
  j["seed"] = sc.seed;
  j["samples"] = r.series.count();
  j["mean_hz"] = v.empty() ? 0.0 : mean_of(v);
  j["std_hz"] = v.empty() ? 0.0 : std::sqrt(variance_of(v));
  j["modality"] = {{"verdict", verdict_name(r.modality.verdict)},
                   {"peak_count", r.modality.peak_count},
                   {"peak_locations_hz", r.modality.peak_locations},
                   {"bimodality_coefficient", r.modality.bimodality_coefficient},
                   {"bandwidth_hz", r.modality.bandwidth}};
  j["deadband"] = {{"d_za_hz", r.d_za_hz},
                   {"fraction_outside", r.deadband.fraction_outside},
                   {"crossing_count", r.deadband.crossing_count},
                   {"window_fractions", r.deadband.window_fractions},
                   {"trend_p_increasing", r.deadband.trend.p_increasing}};
  j["histogram"] = {{"bins", r.histogram.bins()},
                    {"underflow", r.histogram.underflow},
                    {"overflow", r.histogram.overflow}};
  j["governor_wear_events"] = r.summary.wear_events;
  if (sc.synthetic_inertia) {
    const auto ps = power_stats(r.summary.si_power_samples);
    j["synthetic_inertia"] = {{"energy_min_mj", r.summary.e_min_mj},
                              {"energy_max_mj", r.summary.e_max_mj},
                              {"energy_final_mj", r.summary.e_final_mj},
                              {"power_mean_mw", ps.mean},
                              {"power_std_mw", ps.std}};
  }
  if (r.comparison) {
    json crit = json::array();
    for (const auto& c : r.comparison->criteria)
      crit.push_back({{"name", c.name},
                      {"empirical", c.empirical},
                      {"analytic", c.analytic},
                      {"relative_error", c.relative_error},
                      {"threshold", c.threshold},
                      {"pass", c.pass}});
    j["oracle"] = {{"sigma_pu", r.comparison->sigma}, {"criteria", crit}, {"notes", r.comparison->notes}};
  }
  os << j.dump(2) << "\n";
}

}  // namespace freqlab
