#include "freqlab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "freqlab/errors.hpp"
#include "freqlab/parallel.hpp"

namespace freqlab {

std::vector<MachineSpec> ieee14_machines() {
  return {{"G1", 5.148, 615.0, true},
          {"G2", 6.54, 60.0, true},
          {"C3", 6.54, 60.0, false},
          {"C6", 5.06, 25.0, false},
          {"C8", 5.06, 25.0, false}};
}

namespace {

bool multiple_of(double x, double dt) {
  const double r = x / dt;
  return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, r);
}

std::size_t machine_index(const GridScenario& sc, const std::string& name) {
  for (std::size_t i = 0; i < sc.machines.size(); ++i)
    if (sc.machines[i].name == name) return i;
  throw InvalidArgument("scenario '" + sc.label + "': AGC unit '" + name + "' is not a machine");
}

bool has_governors(const GridScenario& sc) {
  return std::any_of(sc.machines.begin(), sc.machines.end(), [](const MachineSpec& m) { return m.governor; });
}

}  // namespace

void GridScenario::validate() const {
  auto fail = [this](const std::string& what) {
    throw InvalidArgument("scenario '" + label + "': " + what);
  };
  if (!(duration_s >= 3600.0)) fail("duration must be >= 3600 s");
  if (!(dt_s > 0.0)) fail("dt must be > 0");
  if (!(cadence_s >= dt_s) || !multiple_of(cadence_s, dt_s)) fail("cadence must be a multiple of dt");
  if (!multiple_of(duration_s, cadence_s)) fail("duration must be a multiple of the cadence");
  if (!(warmup_s >= 0.0) || !multiple_of(warmup_s, dt_s)) fail("warmup must be a multiple of dt");
  if (!(inertia_multiplier > 0.0)) fail("inertia_multiplier must be > 0");
  if (!(s_base_mva > 0.0)) fail("s_base must be > 0");
  if (!(f0_hz > 0.0)) fail("f0 must be > 0");
  if (!(d_l_pu >= 0.0)) fail("d_l must be >= 0");
  if (machines.empty()) fail("at least one machine is required");
  for (const auto& m : machines) {
    if (!(m.h_s > 0.0)) fail("machine " + m.name + ": h must be > 0");
    if (!(m.rating_mva > 0.0)) fail("machine " + m.name + ": rating must be > 0");
  }
  try {
    governor.validate();
    stochastic_load.ou.validate();
    if (synthetic_inertia) synthetic_inertia->validate();
  } catch (const InvalidArgument& e) {
    fail(e.what());
  }
  if (!(warmup_s >= 10.0 / stochastic_load.ou.alpha * (1.0 - 1e-12))) fail("warmup must be >= 10/alpha");
  if (!(stochastic_load.p_l0_mw >= 0.0)) fail("p_l0 must be >= 0");
  if (has_governors(*this) && dt_s > governor.t_servo / 5.0) fail("dt must be <= t_servo/5");
  if (agc) {
    const auto i = machine_index(*this, agc_unit);
    if (!machines[i].governor) fail("AGC unit '" + agc_unit + "' has no governor");
  }
  if (synthetic_inertia) {
    const auto& si = *synthetic_inertia;
    if (!(si.e_state_mj >= 0.0 && si.e_state_mj <= si.e_cap_mj)) fail("initial SI energy outside [0, e_cap]");
  }
  if (histogram.bins < 2) fail("histogram bins must be >= 2");
  if (!(histogram.half_range_hz >= 0.0)) fail("histogram range must be >= 0");
}

double GridScenario::rating_sum_mva() const {
  double s = 0.0;
  for (const auto& m : machines) s += m.rating_mva;
  return s;
}

double GridScenario::h_system() const {
  double e = 0.0;
  for (const auto& m : machines) e += m.h_s * inertia_multiplier * m.rating_mva;
  return e / s_base_mva;
}

GridState GridScenario::initial_state() const {
  validate();
  GridState s;
  s.s_base_mva = s_base_mva;
  for (const auto& m : machines) {
    Generator g;
    g.h = m.h_s * inertia_multiplier;
    g.rating = m.rating_mva;
    if (m.governor) {
      g.tg = governor;
      g.tg->f0_hz = f0_hz;
      g.p_mech = g.tg->state;
    }
    s.generators.push_back(g);
  }
  if (agc) {
    s.agc = *agc;
    s.agc.enabled = true;
    s.agc.unit = machine_index(*this, agc_unit);
  } else {
    s.agc.enabled = false;
  }
  s.coi.f0 = f0_hz;
  s.coi.h_total = h_system();
  s.coi.d_l = d_l_system();
  s.load = stochastic_load;
  s.eta = stochastic_load.ou.eta0;
  s.drift = drifting_load;
  s.si = synthetic_inertia;
  if (s.si) s.si->f0_hz = f0_hz;
  s.stream = NoiseStream{seed, 0};
  return s;
}

SimplifiedSystem GridScenario::linear_reduction() const {
  SimplifiedSystem sys;
  sys.h = h_system();
  sys.d_l = d_l_system();
  const double scale = stochastic_load.p_l0_mw / s_base_mva;
  sys.ou = stochastic_load.ou;
  sys.ou.b *= scale;
  sys.ou.mu *= scale;
  sys.ou.eta0 *= scale;
  return sys;
}

std::vector<GridScenario> builtin_scenarios() {
  GridScenario base;
  base.machines = ieee14_machines();
  base.governor.d_za_hz = 0.036;
  base.stochastic_load.p_l0_mw = 1.0;
  base.stochastic_load.ou = OuParams{0.0, 0.5, 1.0, 0.0};
  base.d_l_pu = 2.0;

  std::vector<GridScenario> out;
  auto add = [&out](GridScenario sc, const std::string& label) {
    sc.label = label;
    out.push_back(std::move(sc));
  };

  GridScenario a = base;  // nominal: governors act on every deviation
  a.governor.d_za_hz = 0.0;
  add(a, "a");

  add(base, "b");

  GridScenario c = base;
  c.d_l_pu = 0.0;
  add(c, "c");

  GridScenario d = c;
  d.stochastic_load.p_l0_mw = 10.0;
  add(d, "d");

  GridScenario e = base;
  e.governor.d_za_hz = 0.100;
  e.drifting_load = DriftingLoad{};
  add(e, "e");

  GridScenario f = base;
  f.drifting_load = DriftingLoad{};
  f.agc = Agc{0.01, 0.0, true, 1};
  add(f, "f");

  GridScenario g = c;
  g.inertia_multiplier = 10.0;
  add(g, "g");

  GridScenario h = g;
  h.duration_s = 4.0 * 86400.0;
  add(h, "h");

  GridScenario i = c;
  i.inertia_multiplier = 100.0;
  i.duration_s = 8.0 * 86400.0;
  add(i, "i");

  GridScenario si = c;
  si.dt_s = 0.001;
  si.synthetic_inertia = SyntheticInertia{};
  add(si, "si");
  return out;
}

GridScenario builtin_scenario(const std::string& name) {
  std::string key = name;
  if (key.rfind("scenario_", 0) == 0) key = key.substr(9);
  for (auto& sc : builtin_scenarios())
    if (sc.label == key) return sc;
  throw InvalidArgument("unknown builtin scenario '" + name + "'");
}

bool ComparisonReport::all_pass() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.pass; });
}

namespace {

Criterion make_criterion(std::string name, double empirical, double analytic, double threshold) {
  Criterion c;
  c.name = std::move(name);
  c.empirical = empirical;
  c.analytic = analytic;
  c.relative_error = std::abs(empirical - analytic) / std::abs(analytic);
  c.threshold = threshold;
  c.pass = c.relative_error <= threshold;
  return c;
}

}  // namespace

ComparisonReport compare_with_oracle(const SampleSeries& series, const SimplifiedSystem& sys,
                                     double f0_hz) {
  series.validate();
  sys.validate();
  if (series.count() < 3) throw EmptyInput("compare_with_oracle: series too short");
  if (series.origin) {
    const auto& o = *series.origin;
    std::string why;
    if (o.deadband_crossings > 0)
      why += " dead-bands crossed " + std::to_string(o.deadband_crossings) + " times;";
    if (o.agc_enabled) why += " AGC active;";
    if (o.synthetic_inertia) why += " synthetic inertia active;";
    if (o.drifting_load) why += " drifting load present;";
    if (!why.empty())
      throw RegimeMismatch("compare_with_oracle: series '" + o.label +
                           "' is not from a linear-regime run:" + why);
  }

  ComparisonReport rep;
  rep.system = sys;
  std::vector<double> x = series.values;
  if (series.unit == Unit::Hz) {
    for (double& v : x) v /= f0_hz;
    rep.notes.push_back("series converted from Hz to pu with f0 = " + std::to_string(f0_hz) + " Hz");
  }

  if (sys.d_l > 0.0) {
    rep.sigma = stationary_sigma(sys);
    const double s2 = rep.sigma * rep.sigma;
    rep.criteria.push_back(make_criterion("pooled_variance", variance_of(x), s2, 0.05));

    double resid = 0.0, var = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double t = series.time_at(i);
      const double r = x[i] - mean_delta_omega(t, sys);
      resid += r * r;
      var += var_delta_omega(t, sys);
    }
    const double n = static_cast<double>(x.size());
    rep.criteria.push_back(make_criterion("transient_variance", resid / n, var / n, 0.05));
  } else {
    // Increment structure function S(τ) = E[(Δω(t+τ) − Δω(t))²] grows with
    // slope b²/(4H²α²) once τ exceeds a few OU correlation times.
    const double a = sys.ou.alpha;
    const auto lag_lo = static_cast<std::size_t>(std::ceil(4.0 / a / series.cadence));
    const auto lag_hi = static_cast<std::size_t>(std::floor(10.0 / a / series.cadence));
    if (lag_hi <= lag_lo || lag_hi >= x.size())
      throw InvalidArgument("compare_with_oracle: cadence too coarse or series too short for the slope fit");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    double m = 0.0;
    for (std::size_t lag = lag_lo; lag <= lag_hi; ++lag) {
      double acc = 0.0;
      for (std::size_t i = 0; i + lag < x.size(); ++i) {
        const double d = x[i + lag] - x[i];
        acc += d * d;
      }
      const double tau = static_cast<double>(lag) * series.cadence;
      const double sf = acc / static_cast<double>(x.size() - lag);
      sx += tau;
      sy += sf;
      sxx += tau * tau;
      sxy += tau * sf;
      m += 1.0;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    rep.criteria.push_back(make_criterion("zero_damping_slope", slope, zero_damping_slope(sys), 0.10));
    rep.notes.push_back("slope fitted on the increment structure function over lags [" +
                        std::to_string(static_cast<double>(lag_lo) * series.cadence) + ", " +
                        std::to_string(static_cast<double>(lag_hi) * series.cadence) + "] s");
  }
  return rep;
}

RunResult run(const GridScenario& sc) {
  sc.validate();
  RunResult r;
  r.scenario = sc;
  GridState state = sc.initial_state();
  const GridStepper stepper(state, sc.dt_s);

  const auto warm_steps = static_cast<std::uint64_t>(std::llround(sc.warmup_s / sc.dt_s));
  const auto per = static_cast<std::uint64_t>(std::llround(sc.cadence_s / sc.dt_s));
  const auto n_samples = static_cast<std::uint64_t>(std::llround(sc.duration_s / sc.cadence_s));
  const std::uint64_t total = warm_steps + n_samples * per;

  r.series.start_time = sc.warmup_s;
  r.series.cadence = sc.cadence_s;
  r.series.unit = Unit::Hz;
  r.series.values.reserve(n_samples);
  if (state.si) {
    r.summary.e_min_mj = r.summary.e_max_mj = state.si->e_state_mj;
    r.summary.si_power_samples.reserve(n_samples);
  }
  const double f0 = sc.f0_hz;
  for (std::uint64_t n = 0; n < total; ++n) {
    if (n >= warm_steps && (n - warm_steps) % per == 0) {
      r.series.values.push_back(state.coi.delta_omega * f0);
      if (state.si) r.summary.si_power_samples.push_back(state.last_si_power_mw);
    }
    stepper.advance(state);
    if (state.si) {
      r.summary.e_min_mj = std::min(r.summary.e_min_mj, state.si->e_state_mj);
      r.summary.e_max_mj = std::max(r.summary.e_max_mj, state.si->e_state_mj);
      r.summary.si_energy_delivered_mj += state.last_si_power_mw * sc.dt_s;
    }
  }
  r.summary.wear_events = state.wear_events;
  r.summary.steps = state.steps;
  if (state.si) r.summary.e_final_mj = state.si->e_state_mj;

  SeriesOrigin origin;
  origin.label = sc.label;
  origin.deadband_crossings = state.wear_events;
  origin.deadbands_present = has_governors(sc);
  origin.agc_enabled = sc.agc.has_value();
  origin.synthetic_inertia = sc.synthetic_inertia.has_value();
  origin.drifting_load = sc.drifting_load.has_value();
  r.series.origin = origin;

  r.d_za_hz = has_governors(sc) ? sc.governor.d_za_hz : 0.0;
  double half = sc.histogram.half_range_hz;
  if (!(half > 0.0)) half = default_range(r.series.values, r.d_za_hz).second;
  r.histogram = normalize_density(build_histogram(r.series, sc.histogram.bins, -half, half));
  r.modality = modality(r.histogram);
  r.deadband = deadband_stats(r.series, r.d_za_hz);

  const bool linear = origin.deadband_crossings == 0 && !origin.agc_enabled && !origin.synthetic_inertia &&
                      !origin.drifting_load;
  if (linear) {
    r.comparison = compare_with_oracle(r.series, sc.linear_reduction(), f0);
    r.comparison->notes.push_back(
        "load noise converted to the system base: b' = b*P_L0/S_base = " +
        std::to_string(sc.stochastic_load.ou.b) + "*" + std::to_string(sc.stochastic_load.p_l0_mw) + "/" +
        std::to_string(sc.s_base_mva) + " pu/sqrt(s)");
    r.comparison->notes.push_back("D_L converted from the machine-rating base (" +
                                  std::to_string(sc.rating_sum_mva()) + " MVA) to the system base: " +
                                  std::to_string(sc.d_l_system()) + " pu");
  }
  return r;
}

std::vector<RunResult> run_all(const std::vector<GridScenario>& scenarios) {
  std::vector<RunResult> out(scenarios.size());
  parallel_for(scenarios.size(), [&](std::size_t i) { out[i] = run(scenarios[i]); });
  return out;
}

}  // namespace freqlab
