#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "freqlab/grid.hpp"
#include "freqlab/oracle.hpp"
#include "freqlab/stats.hpp"

namespace freqlab {

/// A synchronous machine of the scenario. Governor settings are shared by all
/// machines that have one (see GridScenario::governor).
struct MachineSpec {
  std::string name;
  double h_s = 5.0;
  double rating_mva = 100.0;
  bool governor = true;
  bool operator==(const MachineSpec&) const = default;
};

struct HistogramConfig {
  std::size_t bins = 101;
  double half_range_hz = 0.0;  ///< 0 selects ±3·max(d_za, 2σ̂)
  bool operator==(const HistogramConfig&) const = default;
};

/// Full nonlinear scenario. d_l_pu is the load damping on the machine-rating
/// base of the COI (Σ ratings); it is converted to the 100 MVA system base when
/// the grid state is built.
struct GridScenario {
  std::string label = "custom";
  double duration_s = 86400.0;
  double dt_s = 0.01;
  double warmup_s = 600.0;
  std::uint64_t seed = 1;
  double cadence_s = 1.0;
  double inertia_multiplier = 1.0;
  double s_base_mva = kSystemBaseMva;
  double f0_hz = kNominalFrequencyHz;
  double d_l_pu = 2.0;
  std::vector<MachineSpec> machines;
  TurbineGovernor governor;  ///< template applied to machines with a governor
  std::optional<Agc> agc;
  std::string agc_unit = "G2";
  StochasticLoad stochastic_load;
  std::optional<DriftingLoad> drifting_load;
  std::optional<SyntheticInertia> synthetic_inertia;
  HistogramConfig histogram;

  bool operator==(const GridScenario&) const = default;

  /// Throws InvalidArgument on any violated invariant (duration ≥ 3600 s,
  /// warmup ≥ 10/α, inertia_multiplier > 0, ...).
  void validate() const;
  double rating_sum_mva() const;
  double d_l_system() const { return d_l_pu * rating_sum_mva() / s_base_mva; }
  double h_system() const;
  GridState initial_state() const;
  /// Linear model on the system base: H = h_system(), D_L = d_l_system(),
  /// η scaled to system pu (b' = b·P_L0/S_base).
  SimplifiedSystem linear_reduction() const;
};

/// IEEE 14-bus machine set (two governed units, three compensators).
std::vector<MachineSpec> ieee14_machines();

/// The ten presets a, b, c, d, e, f, g, h, i and si (all seed 1).
std::vector<GridScenario> builtin_scenarios();
/// Accepts "b" or "scenario_b"; throws InvalidArgument for unknown names.
GridScenario builtin_scenario(const std::string& name);

GridScenario parse_scenario(std::istream& in, const std::string& source = "<stream>");
GridScenario load_scenario(const std::string& path_or_builtin);
std::string serialize_scenario(const GridScenario& sc);

struct RunSummary {
  std::uint64_t wear_events = 0;
  std::uint64_t steps = 0;
  double e_min_mj = 0.0;
  double e_max_mj = 0.0;
  double e_final_mj = 0.0;
  double si_energy_delivered_mj = 0.0;  ///< Σ p·dt over the whole run
  std::vector<double> si_power_samples;  ///< injected MW at each sample instant
};

struct Criterion {
  std::string name;
  double empirical = 0.0;
  double analytic = 0.0;
  double relative_error = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct ComparisonReport {
  SimplifiedSystem system;
  double sigma = 0.0;  ///< analytic stationary σ (pu); 0 when D_L = 0
  std::vector<Criterion> criteria;
  std::vector<std::string> notes;  ///< base conversions, estimator details
  bool all_pass() const;
};

/// Compares a linear-regime series (Hz or pu) with the closed forms. Sample
/// times are measured from the deterministic start (Δω = 0, η = η₀).
ComparisonReport compare_with_oracle(const SampleSeries& series, const SimplifiedSystem& sys,
                                     double f0_hz = kNominalFrequencyHz);

struct RunResult {
  GridScenario scenario;
  SampleSeries series;  ///< Δf in Hz, one sample per cadence after warmup
  Histogram histogram;
  ModalityReport modality;
  DeadbandStats deadband;
  double d_za_hz = 0.0;
  RunSummary summary;
  std::optional<ComparisonReport> comparison;
};

/// Simulates, samples and analyses one scenario. Deterministic per seed.
RunResult run(const GridScenario& sc);

/// Runs the scenarios on the worker pool; results keep the input order.
std::vector<RunResult> run_all(const std::vector<GridScenario>& scenarios);

void write_report_text(std::ostream& os, const RunResult& r);
void write_report_json(std::ostream& os, const RunResult& r);
void write_modality_text(std::ostream& os, const ModalityReport& m);

}  // namespace freqlab
