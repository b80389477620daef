#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "freqlab/noise.hpp"
#include "freqlab/ou.hpp"

namespace freqlab {

inline constexpr double kSystemBaseMva = 100.0;
inline constexpr double kNominalFrequencyHz = 60.0;

/// Dead-zone: 0 inside [−d_za, d_za], x − d_za·sign(x) outside.
double apply_deadband(double x, double d_za) noexcept;

/// Droop governor with dead-band and a first-order servo. Powers are
/// deviations from the dispatch point in pu of the machine rating.
struct TurbineGovernor {
  double droop = 0.05;       ///< pu frequency per pu power
  double t_servo = 0.5;      ///< s
  double d_za_hz = 0.036;    ///< dead-band half-width (Hz)
  double f0_hz = kNominalFrequencyHz;
  double p_ref = 0.0;        ///< scheduled power (pu)
  double d_p = 0.0;          ///< AGC offset input (pu)
  double state = 0.0;        ///< servo output = mechanical power (pu)
  bool limits_enabled = false;
  double p_max = 1.0;        ///< upper output limit when limits are enabled (pu)
  bool deadband_active = false;  ///< dead-band output was nonzero on the last step

  double d_za_pu() const noexcept { return d_za_hz / f0_hz; }
  void validate() const;
  bool operator==(const TurbineGovernor&) const = default;
};

struct TgStepResult {
  TurbineGovernor tg;
  double p_mech;  ///< pu of machine rating
  bool wear_event;
};

/// Exact first-order servo update toward p_ref + d_p − deadband(freq_dev)/droop.
/// dt must not exceed t_servo/5.
TgStepResult tg_step(const TurbineGovernor& tg, double freq_dev, double dt);

struct Generator {
  double h = 5.0;        ///< s, on the machine rating
  double rating = 100.0; ///< MVA
  std::optional<TurbineGovernor> tg;  ///< synchronous compensators have none
  double p_mech = 0.0;   ///< pu of rating

  void validate() const;
  bool operator==(const Generator&) const = default;
};

struct Agc {
  double k_agc = 0.01;   ///< pu/s per pu frequency
  double p_agc = 0.0;    ///< pu, fed to the governor d_p of `unit`
  bool enabled = false;
  std::size_t unit = 1;  ///< index of the generator driven by the AGC
  bool operator==(const Agc&) const = default;
};

/// p_agc += k_agc·(1 − ω)·dt; frozen when disabled.
Agc agc_step(const Agc& agc, double omega_coi, double dt);

struct StochasticLoad {
  double p_l0_mw = 1.0;
  OuParams ou{0.0, 0.5, 1.0, 0.0};
  double gamma = 0.0;   ///< voltage exponent; inert because v_ratio is held at 1
  double v_ratio = 1.0;
  bool operator==(const StochasticLoad&) const = default;
};

/// P_D0·(1 + Δp_D(t)) with Δp_D(t) = −amplitude·sin(t/timescale).
struct DriftingLoad {
  double p_d0_mw = 14.9;
  double amplitude = 0.12;
  double timescale_s = 86400.0;
  bool operator==(const DriftingLoad&) const = default;
};

/// Total load power (MW) at time t for load level η.
double load_power(const StochasticLoad& sl, const DriftingLoad* dl, double t, double eta);
inline double load_power(const StochasticLoad& sl, const std::optional<DriftingLoad>& dl, double t,
                         double eta) {
  return load_power(sl, dl ? &*dl : nullptr, t, eta);
}

/// Battery-backed converter emulating inertia. Power positive = injection
/// into the grid (battery discharging).
struct SyntheticInertia {
  double p_max_mw = 2.0;
  double e_cap_mj = 160.0;
  double e_state_mj = 80.0;
  double k_derivative = 20.0;      ///< MW per (Hz/s)
  double k_proportional = 1000.0;  ///< MW per Hz
  double filter_fc_hz = 1000.0;
  double pv_mean_mw = 1.0;         ///< PV output, held constant and scheduled
  double f0_hz = kNominalFrequencyHz;
  double filtered_rate = 0.0;      ///< filter state, pu/s

  void validate() const;
  bool operator==(const SyntheticInertia&) const = default;
};

struct SiStepResult {
  SyntheticInertia si;
  double p_mw;
};

/// Raw command −k_d·filtered(dω/dt)·f0 − k_p·Δω·f0, clamped to ±p_max and to
/// what the stored energy allows over dt; e_state decreases by p·dt (MJ).
SiStepResult synthetic_inertia_step(const SyntheticInertia& si, double delta_omega,
                                    double d_omega_dt, double dt);

struct CoiState {
  double delta_omega = 0.0;  ///< pu
  double f0 = kNominalFrequencyHz;
  double h_total = 0.0;      ///< s on the system base
  double d_l = 0.0;          ///< pu on the system base

  double frequency_hz() const noexcept { return f0 * (1.0 + delta_omega); }
};

/// Complete state of the COI grid model. Advanced by value (`step_grid`) or
/// in place through a `GridStepper` that caches per-dt coefficients.
struct GridState {
  double t = 0.0;
  CoiState coi;
  std::vector<Generator> generators;
  Agc agc;
  StochasticLoad load;
  double eta = 0.0;
  std::optional<DriftingLoad> drift;
  std::optional<SyntheticInertia> si;
  double s_base_mva = kSystemBaseMva;
  double prev_delta_omega = 0.0;
  NoiseStream stream;

  // Diagnostics of the last step and running tallies.
  double last_mismatch_pu = 0.0;   ///< ΣP_mech + P_si − ΔP_load, system base
  double last_si_power_mw = 0.0;
  std::uint64_t wear_events = 0;
  std::uint64_t steps = 0;

  /// Σ H_i·S_i / S_base, the rating-weighted inertia on the system base.
  double rating_weighted_h() const;
  void validate() const;
};

class GridStepper {
 public:
  GridStepper(const GridState& state, double dt);
  /// One explicit swing update; throws SimulationDiverged past |Δω| > 0.1 pu.
  void advance(GridState& s) const;
  double dt() const noexcept { return dt_; }

 private:
  double dt_;
  OuStepper ou_;
  std::vector<double> servo_decay_;
  double filter_decay_ = 0.0;
  double load_scale_ = 1.0;
};

/// Value form of one step using the given stream for the load noise.
GridState step_grid(const GridState& state, double dt, NoiseStream stream);

inline constexpr double kDivergenceLimitPu = 0.1;

}  // namespace freqlab
