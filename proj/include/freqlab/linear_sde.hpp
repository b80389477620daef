#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "freqlab/lyapunov.hpp"
#include "freqlab/noise.hpp"

namespace freqlab {

using MatrixXd = Eigen::MatrixXd;
using VectorXd = Eigen::VectorXd;
using DiscreteTransition = DiscreteTransitionT<double>;

/// One drive entry μᵢ(t) = constant + rho·sin(psi·t). Either part may be zero.
struct DriveTerm {
  double constant = 0.0;
  double rho = 0.0;
  double psi = 0.0;

  static DriveTerm constant_term(double v) noexcept { return {v, 0.0, 0.0}; }
  static DriveTerm sinusoid(double rho, double psi) noexcept { return {0.0, rho, psi}; }
  bool has_sinusoid() const noexcept { return rho != 0.0; }
};

double evaluate(const DriveTerm& term, double t) noexcept;

/// dx = (−A x + μ(t)) dt + B dW with one drive entry per state component.
struct LinearSde {
  MatrixXd a;
  MatrixXd b;
  std::vector<DriveTerm> drive;  ///< empty means μ ≡ 0
  VectorXd x0;
  std::vector<std::string> labels;

  Eigen::Index dim() const noexcept { return a.rows(); }
  Eigen::Index noise_dim() const noexcept { return b.cols(); }
  /// Throws InvalidArgument on inconsistent shapes, psi < 0 or non-finite data.
  void validate() const;
  VectorXd drive_at(double t) const;
};

/// Sample path with one column per time stamp.
struct Trajectory {
  VectorXd t;
  MatrixXd states;  ///< dim × len(t)
  std::vector<std::string> labels;

  Eigen::Index size() const noexcept { return t.size(); }
  Eigen::Index component(const std::string& label) const;
  /// Throws InvariantViolation if t is not strictly increasing, shapes
  /// disagree, or any entry is NaN/Inf.
  void validate() const;
};

enum class Scheme { Exact, EulerMaruyama };

/// Noise-free solution x(t) from x0 at time 0, by one exponential of the
/// augmented generator (exact up to the exponential's rounding).
VectorXd deterministic_solution(const LinearSde& sys, double t);

/// Integrates the SDE on t = 0, dt, 2dt, ... up to the horizon. The exact
/// scheme uses the matrix-exponential transition, the exactly integrated
/// drive and the Van Loan noise covariance, so its one-step law is exact for
/// any dt. The last step is shortened when horizon is not a multiple of dt.
/// Gaussians are consumed in a fixed order: dim() per step for Exact,
/// noise_dim() per step for EulerMaruyama.
Trajectory simulate_linear(const LinearSde& sys, double horizon, double dt, NoiseStream stream,
                           Scheme scheme = Scheme::Exact);

struct CovarianceSeries {
  VectorXd t;
  std::vector<MatrixXd> w;
};

/// RK4 integration of ẇ = −(Aw + wAᵀ) + BBᵀ. The drive never enters.
CovarianceSeries propagate_covariance(const LinearSde& sys, const MatrixXd& w0, double horizon,
                                      double dt);

/// Limit of propagate_covariance: the solution of Aw + wAᵀ = BBᵀ.
MatrixXd stationary_covariance(const LinearSde& sys);

/// One-step transition e^{−A·dt} and integrated noise covariance.
DiscreteTransition transition_covariance(const LinearSde& sys, double dt);

/// CSV `t,<label1>,...` with 17 significant digits (round-trip exact).
void write_csv(std::ostream& os, const Trajectory& traj);

}  // namespace freqlab
