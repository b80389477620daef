#include "freqlab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "freqlab/errors.hpp"

namespace freqlab {

void SimplifiedSystem::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("SimplifiedSystem: H must be > 0");
  if (!(d_l >= 0.0) || !std::isfinite(d_l)) throw InvalidArgument("SimplifiedSystem: D_L must be >= 0");
  ou.validate();
  if (drive && (!(drive->psi > 0.0) || !std::isfinite(drive->rho) || !std::isfinite(drive->psi)))
    throw InvalidArgument("SimplifiedSystem: drive psi must be > 0");
}

namespace {

enum class Degeneracy { None, Near, Exact };

Degeneracy degeneracy(const SimplifiedSystem& s) {
  const double two_h_alpha = 2.0 * s.h * s.ou.alpha;
  if (two_h_alpha == s.d_l) return Degeneracy::Exact;
  if (std::abs(two_h_alpha - s.d_l) < 1e-6 * std::max(two_h_alpha, s.d_l)) return Degeneracy::Near;
  return Degeneracy::None;
}

void require_nondegenerate(const SimplifiedSystem& s, const char* who) {
  if (degeneracy(s) == Degeneracy::Exact)
    throw DegenerateParameters(std::string(who) + ": 2*H*alpha equals D_L, closed form is singular");
}

void require_damped(const SimplifiedSystem& s, const char* who) {
  if (s.d_l == 0.0)
    throw DomainError(std::string(who) + ": D_L = 0 has no stationary variance; use var_zero_damping");
}

// Decay rates of the variance terms: λ = D_L/2H and α.
double lambda(const SimplifiedSystem& s) { return s.d_l / (2.0 * s.h); }

// b²/(4H²(λ − α)²), the common prefactor of every variance term.
double variance_prefactor(const SimplifiedSystem& s) {
  const double gap = lambda(s) - s.ou.alpha;
  return s.ou.b * s.ou.b / (4.0 * s.h * s.h * gap * gap);
}

}  // namespace

AnalyticMoments analytic_moments(const SimplifiedSystem& sys) {
  sys.validate();
  require_damped(sys, "analytic_moments");
  require_nondegenerate(sys, "analytic_moments");
  AnalyticMoments m;
  const double a = sys.ou.alpha;
  const double lam = lambda(sys);
  m.sigma = stationary_sigma(sys);
  const double s2 = m.sigma * m.sigma;
  const double k = variance_prefactor(sys);
  if (s2 > 0.0) {
    m.kappa1 = k / (2.0 * lam * s2);
    m.kappa2 = 2.0 * k / ((a + lam) * s2);
  }
  m.kappa3 = k / (2.0 * a);
  if (sys.drive) {
    const double rho = sys.drive->rho;
    const double psi = sys.drive->psi;
    const double den = a * a + psi * psi;
    // Steady-state E[η] = A_s sin Ψt + A_c cos Ψt plus the transient ρΨ/(α²+Ψ²)e^{−αt}.
    const double a_s = rho * a / den;
    const double a_c = -rho * psi / den;
    const double two_h = 2.0 * sys.h;
    const double den2 = two_h * (lam * lam + psi * psi);
    m.rho_s = -(lam * a_s + psi * a_c) / den2;
    m.rho_c = -(lam * a_c - psi * a_s) / den2;
    m.c_alpha = (rho * psi / den) / (two_h * a - sys.d_l);
    m.k_const = -(m.c_alpha + m.rho_c);
  }
  return m;
}

double stationary_sigma(const SimplifiedSystem& sys) {
  sys.validate();
  require_damped(sys, "stationary_sigma");
  const double a = sys.ou.alpha;
  return sys.ou.b / std::sqrt(2.0 * a * sys.d_l * (sys.d_l + 2.0 * sys.h * a));
}

double mean_delta_omega(double t, const SimplifiedSystem& sys, MeanMode mode) {
  sys.validate();
  if (!(t >= 0.0)) throw InvalidArgument("mean_delta_omega: t must be >= 0");
  require_nondegenerate(sys, "mean_delta_omega");
  const bool closed = sys.ou.mu == 0.0 && sys.ou.eta0 == 0.0;
  if (!sys.drive && closed) return 0.0;

  if (closed && degeneracy(sys) == Degeneracy::None) {
    const double a = sys.ou.alpha;
    const double psi = sys.drive->psi;
    const double den = a * a + psi * psi;
    const double lam = lambda(sys);
    const double rho = sys.drive->rho;
    const double a_s = rho * a / den;
    const double a_c = -rho * psi / den;
    const double two_h = 2.0 * sys.h;
    const double den2 = two_h * (lam * lam + psi * psi);
    const double rho_s = -(lam * a_s + psi * a_c) / den2;
    const double rho_c = -(lam * a_c - psi * a_s) / den2;
    if (mode == MeanMode::Asymptotic) return rho_c * std::cos(psi * t) + rho_s * std::sin(psi * t);
    const double c_alpha = (rho * psi / den) / (two_h * a - sys.d_l);
    // With k = −(c_α + ρ_c) the sum regroups into differences that vanish at t = 0.
    const double e_lam = std::exp(-lam * t);
    return rho_c * (std::cos(psi * t) - e_lam) + rho_s * std::sin(psi * t) +
           c_alpha * (std::exp(-a * t) - e_lam);
  }
  if (mode == MeanMode::Asymptotic)
    throw DomainError("mean_delta_omega: asymptotic form requires mu = 0 and eta0 = 0");
  return deterministic_solution(to_linear_sde(sys), t)(0);
}

double var_delta_omega(double t, const SimplifiedSystem& sys) {
  sys.validate();
  if (!(t >= 0.0)) throw InvalidArgument("var_delta_omega: t must be >= 0");
  require_damped(sys, "var_delta_omega");
  require_nondegenerate(sys, "var_delta_omega");
  if (t == 0.0) return 0.0;
  const double a = sys.ou.alpha;
  const double lam = lambda(sys);
  if (std::max(a, lam) * t < 1e-3) {
    // Taylor series; the exponential form cancels to O(t³) here.
    const double c = sys.ou.b * sys.ou.b / (4.0 * sys.h * sys.h);
    return c * t * t * t *
           (1.0 / 3.0 - (a + lam) * t / 4.0 + (7.0 * a * a + 10.0 * a * lam + 7.0 * lam * lam) * t * t / 60.0);
  }
  if (degeneracy(sys) == Degeneracy::Near) {
    const LinearSde lin = to_linear_sde(sys);
    return integrated_covariance(lin.a, (lin.b * lin.b.transpose()).eval(), t).q(0, 0);
  }
  // Var = K[(1 − e^{−2αt})/2α − 2(1 − e^{−(α+λ)t})/(α+λ) + (1 − e^{−2λt})/2λ],
  // written with expm1 so small t keeps full relative precision.
  const double k = variance_prefactor(sys);
  return k * (-std::expm1(-2.0 * a * t) / (2.0 * a) + 2.0 * std::expm1(-(a + lam) * t) / (a + lam) -
              std::expm1(-2.0 * lam * t) / (2.0 * lam));
}

double var_zero_damping(double t, const SimplifiedSystem& sys) {
  sys.validate();
  if (sys.d_l != 0.0) throw InvalidArgument("var_zero_damping: requires D_L = 0");
  if (!(t >= 0.0)) throw InvalidArgument("var_zero_damping: t must be >= 0");
  const double a = sys.ou.alpha;
  const double x = a * t;
  // f(x) = x + 2e^{−x} − ½e^{−2x} − 3/2 cancels to O(x³) near 0.
  double f;
  if (x < 1e-2)
    f = x * x * x * (1.0 / 3.0 - x / 4.0 + 7.0 * x * x / 60.0);
  else
    f = x + 2.0 * std::exp(-x) - 0.5 * std::exp(-2.0 * x) - 1.5;
  const double b = sys.ou.b;
  return b * b / (4.0 * sys.h * sys.h * a * a * a) * f;
}

double zero_damping_slope(const SimplifiedSystem& sys) {
  sys.validate();
  const double a = sys.ou.alpha;
  return sys.ou.b * sys.ou.b / (4.0 * sys.h * sys.h * a * a);
}

InertiaThreshold inertia_effectiveness_threshold(double alpha, double d_l) {
  if (!(alpha > 0.0)) throw InvalidArgument("inertia_effectiveness_threshold: alpha must be > 0");
  if (d_l == 0.0)
    throw DomainError(
        "inertia_effectiveness_threshold: D_L = 0, inertia alone cannot bound the variance");
  if (!(d_l > 0.0)) throw InvalidArgument("inertia_effectiveness_threshold: D_L must be > 0");
  const double h = (1.0 - 2.0 * alpha * d_l * d_l) / (4.0 * alpha * alpha * d_l);
  if (h <= 0.0) return {true, 0.0};
  return {false, h};
}

LinearSde to_linear_sde(const SimplifiedSystem& sys) {
  sys.validate();
  LinearSde lin;
  lin.a.resize(2, 2);
  lin.a << sys.d_l / (2.0 * sys.h), 1.0 / (2.0 * sys.h), 0.0, sys.ou.alpha;
  lin.b.resize(2, 1);
  lin.b << 0.0, sys.ou.b;
  DriveTerm eta_drive = DriveTerm::constant_term(sys.ou.mu);
  if (sys.drive) {
    eta_drive.rho = sys.drive->rho;
    eta_drive.psi = sys.drive->psi;
  }
  lin.drive = {DriveTerm{}, eta_drive};
  lin.x0.resize(2);
  lin.x0 << 0.0, sys.ou.eta0;
  lin.labels = {"delta_omega", "eta"};
  return lin;
}

}  // namespace freqlab
