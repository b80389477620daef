#include "freqlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "freqlab/errors.hpp"

namespace freqlab {

double apply_deadband(double x, double d_za) noexcept {
  if (std::abs(x) <= d_za) return 0.0;
  return x > 0.0 ? x - d_za : x + d_za;
}

void TurbineGovernor::validate() const {
  if (!(droop > 0.0)) throw InvalidArgument("TurbineGovernor: droop must be > 0");
  if (!(t_servo > 0.0)) throw InvalidArgument("TurbineGovernor: t_servo must be > 0");
  if (!(d_za_hz >= 0.0)) throw InvalidArgument("TurbineGovernor: d_za must be >= 0");
  if (!(f0_hz > 0.0)) throw InvalidArgument("TurbineGovernor: f0 must be > 0");
  if (limits_enabled && !(p_max > 0.0)) throw InvalidArgument("TurbineGovernor: p_max must be > 0");
}

namespace {

// Servo update with a precomputed decay e^{−dt/t_servo}. Returns true on a
// wear event (dead-band output switching between zero and nonzero).
bool governor_update(TurbineGovernor& tg, double freq_dev, double decay) noexcept {
  const double y = apply_deadband(freq_dev, tg.d_za_pu());
  double cmd = tg.p_ref + tg.d_p - y / tg.droop;
  if (tg.limits_enabled) cmd = std::clamp(cmd, 0.0, tg.p_max);
  tg.state = cmd + (tg.state - cmd) * decay;
  const bool active = y != 0.0;
  const bool wear = active != tg.deadband_active;
  tg.deadband_active = active;
  return wear;
}

double si_filter_decay(const SyntheticInertia& si, double dt) {
  return std::exp(-2.0 * std::numbers::pi * si.filter_fc_hz * dt);
}

double si_update(SyntheticInertia& si, double delta_omega, double d_omega_dt, double dt,
                 double decay) noexcept {
  si.filtered_rate = d_omega_dt + (si.filtered_rate - d_omega_dt) * decay;
  double p = -si.k_derivative * si.filtered_rate * si.f0_hz - si.k_proportional * delta_omega * si.f0_hz;
  p = std::clamp(p, -si.p_max_mw, si.p_max_mw);
  if (p > 0.0) p = std::min(p, si.e_state_mj / dt);
  if (p < 0.0) p = std::max(p, -(si.e_cap_mj - si.e_state_mj) / dt);
  si.e_state_mj = std::clamp(si.e_state_mj - p * dt, 0.0, si.e_cap_mj);
  return p;
}

void check_si_energy(const SyntheticInertia& si) {
  if (!(si.e_state_mj >= 0.0 && si.e_state_mj <= si.e_cap_mj))
    throw InvariantViolation("synthetic inertia: stored energy " + std::to_string(si.e_state_mj) +
                             " MJ outside [0, " + std::to_string(si.e_cap_mj) + "]");
}

}  // namespace

TgStepResult tg_step(const TurbineGovernor& tg, double freq_dev, double dt) {
  tg.validate();
  if (!(dt > 0.0)) throw InvalidArgument("tg_step: dt must be > 0");
  if (dt > tg.t_servo / 5.0)
    throw InvalidArgument("tg_step: dt " + std::to_string(dt) + " exceeds t_servo/5");
  TgStepResult r{tg, 0.0, false};
  r.wear_event = governor_update(r.tg, freq_dev, std::exp(-dt / tg.t_servo));
  r.p_mech = r.tg.state;
  return r;
}

void Generator::validate() const {
  if (!(h > 0.0)) throw InvalidArgument("Generator: h must be > 0");
  if (!(rating > 0.0)) throw InvalidArgument("Generator: rating must be > 0");
  if (tg) tg->validate();
}

Agc agc_step(const Agc& agc, double omega_coi, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("agc_step: dt must be > 0");
  Agc next = agc;
  if (agc.enabled) next.p_agc += agc.k_agc * (1.0 - omega_coi) * dt;
  return next;
}

double load_power(const StochasticLoad& sl, const DriftingLoad* dl, double t, double eta) {
  if (!(t >= 0.0)) throw InvalidArgument("load_power: t must be >= 0");
  double p = eta * sl.p_l0_mw * std::pow(sl.v_ratio, sl.gamma);
  if (dl) p += dl->p_d0_mw * (1.0 - dl->amplitude * std::sin(t / dl->timescale_s));
  return p;
}

void SyntheticInertia::validate() const {
  if (!(p_max_mw >= 0.0)) throw InvalidArgument("SyntheticInertia: p_max must be >= 0");
  if (!(e_cap_mj >= 0.0)) throw InvalidArgument("SyntheticInertia: e_cap must be >= 0");
  if (!(filter_fc_hz > 0.0)) throw InvalidArgument("SyntheticInertia: filter_fc must be > 0");
  if (!(f0_hz > 0.0)) throw InvalidArgument("SyntheticInertia: f0 must be > 0");
}

SiStepResult synthetic_inertia_step(const SyntheticInertia& si, double delta_omega,
                                    double d_omega_dt, double dt) {
  si.validate();
  if (!(dt > 0.0)) throw InvalidArgument("synthetic_inertia_step: dt must be > 0");
  check_si_energy(si);
  SiStepResult r{si, 0.0};
  r.p_mw = si_update(r.si, delta_omega, d_omega_dt, dt, si_filter_decay(si, dt));
  return r;
}

double GridState::rating_weighted_h() const {
  double e = 0.0;
  for (const auto& g : generators) e += g.h * g.rating;
  return e / s_base_mva;
}

void GridState::validate() const {
  if (generators.empty()) throw InvalidArgument("GridState: at least one generator required");
  for (const auto& g : generators) g.validate();
  if (!(coi.h_total > 0.0)) throw InvalidArgument("GridState: h_total must be > 0");
  if (!(coi.d_l >= 0.0)) throw InvalidArgument("GridState: d_l must be >= 0");
  if (!(s_base_mva > 0.0)) throw InvalidArgument("GridState: system base must be > 0");
  load.ou.validate();
  if (!(load.p_l0_mw >= 0.0)) throw InvalidArgument("GridState: p_l0 must be >= 0");
  if (agc.enabled && (agc.unit >= generators.size() || !generators[agc.unit].tg))
    throw InvalidArgument("GridState: AGC unit must be a generator with a governor");
  if (si) {
    si->validate();
    check_si_energy(*si);
  }
}

GridStepper::GridStepper(const GridState& state, double dt) : dt_(dt), ou_(state.load.ou, dt) {
  state.validate();
  if (!(dt > 0.0)) throw InvalidArgument("GridStepper: dt must be > 0");
  for (const auto& g : state.generators) {
    if (g.tg && dt > g.tg->t_servo / 5.0)
      throw InvalidArgument("GridStepper: dt exceeds t_servo/5 of a governor");
    servo_decay_.push_back(g.tg ? std::exp(-dt / g.tg->t_servo) : 0.0);
  }
  if (state.si) filter_decay_ = si_filter_decay(*state.si, dt);
  load_scale_ = std::pow(state.load.v_ratio, state.load.gamma);
}

void GridStepper::advance(GridState& s) const {
  const double dw = s.coi.delta_omega;
  const double sb = s.s_base_mva;

  double gen_pu = 0.0;
  for (std::size_t i = 0; i < s.generators.size(); ++i) {
    Generator& g = s.generators[i];
    if (!g.tg) continue;
    if (s.agc.enabled && i == s.agc.unit) g.tg->d_p = s.agc.p_agc;
    if (governor_update(*g.tg, dw, servo_decay_[i])) ++s.wear_events;
    g.p_mech = g.tg->state;
    gen_pu += (g.p_mech - g.tg->p_ref) * g.rating / sb;
  }

  double p_si = 0.0;
  if (s.si) p_si = si_update(*s.si, dw, (dw - s.prev_delta_omega) / dt_, dt_, filter_decay_);

  double load_dev_mw = s.eta * s.load.p_l0_mw * load_scale_;
  if (s.drift) load_dev_mw -= s.drift->p_d0_mw * s.drift->amplitude * std::sin(s.t / s.drift->timescale_s);

  s.last_mismatch_pu = gen_pu + p_si / sb - load_dev_mw / sb;
  s.last_si_power_mw = p_si;
  s.prev_delta_omega = dw;
  s.coi.delta_omega = dw + dt_ / (2.0 * s.coi.h_total) * (s.last_mismatch_pu - s.coi.d_l * dw);
  if (s.agc.enabled) s.agc.p_agc += s.agc.k_agc * (-dw) * dt_;
  s.eta = ou_.step(s.eta, s.stream);
  s.t += dt_;
  ++s.steps;

  if (!(std::abs(s.coi.delta_omega) <= kDivergenceLimitPu))
    throw SimulationDiverged("grid frequency deviation left the +-0.1 pu stability guard at t=" +
                                 std::to_string(s.t) + " s",
                             s.t);
}

GridState step_grid(const GridState& state, double dt, NoiseStream stream) {
  GridState next = state;
  next.stream = stream;
  GridStepper(next, dt).advance(next);
  return next;
}

}  // namespace freqlab
