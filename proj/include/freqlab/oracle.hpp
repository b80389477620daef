#pragma once

#include <optional>

#include "freqlab/linear_sde.hpp"
#include "freqlab/ou.hpp"

namespace freqlab {

/// μ(t) = rho·sin(psi·t) added to the OU drift.
struct Sinusoid {
  double rho = 0.0;  ///< pu/s
  double psi = 0.0;  ///< rad/s
};

/// Two-state linear model 2H·dΔω = (−D_L·Δω − η)dt with an OU load η.
struct SimplifiedSystem {
  double h = 3.0;    ///< inertia constant (s)
  double d_l = 2.0;  ///< load damping (pu/pu)
  OuParams ou;
  std::optional<Sinusoid> drive;

  /// Throws InvalidArgument unless H > 0, D_L ≥ 0 and psi > 0 when driven.
  void validate() const;
};

/// Coefficients of the closed-form mean and variance.
///   Var(t) = σ²(1 − κ₁e^{−(D_L/H)t} + κ₂e^{−((D_L+2Hα)/2H)t}) − κ₃e^{−2αt}
///   E(t)   = ρ_c cos Ψt + ρ_s sin Ψt + c_α e^{−αt} + k e^{−(D_L/2H)t}
struct AnalyticMoments {
  double sigma = 0.0;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double kappa3 = 0.0;
  double rho_c = 0.0;
  double rho_s = 0.0;
  double c_alpha = 0.0;  ///< amplitude of the e^{−αt} mean term
  double k_const = 0.0;
};

/// Requires D_L > 0 and 2Hα ≠ D_L (DegenerateParameters otherwise).
AnalyticMoments analytic_moments(const SimplifiedSystem& sys);

/// b/√(2αD_L(D_L + 2Hα)). D_L = 0 raises DomainError.
double stationary_sigma(const SimplifiedSystem& sys);

enum class MeanMode { Transient, Asymptotic };

/// E[Δω](t) from Δω(0) = 0. Closed form when μ = 0 and η₀ = 0; otherwise (or
/// when 2Hα is within 10⁻⁶ relative of D_L) the exact exponential flow of the
/// noise-free system. Exact equality 2Hα = D_L raises DegenerateParameters.
double mean_delta_omega(double t, const SimplifiedSystem& sys, MeanMode mode = MeanMode::Transient);

/// Var[Δω](t) from a deterministic start. Near-degenerate parameters are
/// evaluated through the integrated Lyapunov solution instead of the κ form.
double var_delta_omega(double t, const SimplifiedSystem& sys);

/// Zero-damping variance (b²/4H²α²)[t + (2e^{−αt} − ½e^{−2αt} − 3/2)/α].
double var_zero_damping(double t, const SimplifiedSystem& sys);

/// Asymptotic growth rate b²/(4H²α²) of var_zero_damping.
double zero_damping_slope(const SimplifiedSystem& sys);

struct InertiaThreshold {
  bool always_effective = false;
  double h_star = 0.0;  ///< seconds; meaningful when !always_effective
};

/// (1 − 2αD_L²)/(4α²D_L). Non-positive values mean inertia always helps.
InertiaThreshold inertia_effectiveness_threshold(double alpha, double d_l);

/// State order (Δω, η); drive on η is μ + rho·sin(psi·t).
LinearSde to_linear_sde(const SimplifiedSystem& sys);

}  // namespace freqlab
