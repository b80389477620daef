#include "freqlab/linear_sde.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "freqlab/errors.hpp"

namespace freqlab {

double evaluate(const DriveTerm& term, double t) noexcept {
  return term.constant + term.rho * std::sin(term.psi * t);
}

void LinearSde::validate() const {
  if (a.rows() < 1 || a.rows() != a.cols()) throw InvalidArgument("LinearSde: A must be square, N >= 1");
  if (b.rows() != a.rows() || b.cols() < 1)
    throw InvalidArgument("LinearSde: B must be N x M with M >= 1");
  if (x0.size() != a.rows()) throw InvalidArgument("LinearSde: x0 must have N entries");
  if (!drive.empty() && static_cast<Eigen::Index>(drive.size()) != a.rows())
    throw InvalidArgument("LinearSde: drive must be empty or have N entries");
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != a.rows())
    throw InvalidArgument("LinearSde: labels must be empty or have N entries");
  if (!a.allFinite() || !b.allFinite() || !x0.allFinite())
    throw InvalidArgument("LinearSde: non-finite entries");
  for (const auto& d : drive) {
    if (!std::isfinite(d.constant) || !std::isfinite(d.rho) || !std::isfinite(d.psi))
      throw InvalidArgument("LinearSde: drive entries must be finite");
    if (d.psi < 0.0) throw InvalidArgument("LinearSde: sinusoid drive needs psi >= 0");
  }
}

VectorXd LinearSde::drive_at(double t) const {
  VectorXd mu = VectorXd::Zero(dim());
  for (std::size_t i = 0; i < drive.size(); ++i) mu(static_cast<Eigen::Index>(i)) = evaluate(drive[i], t);
  return mu;
}

Eigen::Index Trajectory::component(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return static_cast<Eigen::Index>(i);
  throw InvalidArgument("Trajectory: no component labelled '" + label + "'");
}

void Trajectory::validate() const {
  if (states.cols() != t.size()) throw InvariantViolation("Trajectory: len(t) != len(states)");
  if (static_cast<Eigen::Index>(labels.size()) != states.rows())
    throw InvariantViolation("Trajectory: one label per component required");
  for (Eigen::Index k = 1; k < t.size(); ++k)
    if (!(t(k) > t(k - 1))) throw InvariantViolation("Trajectory: t not strictly increasing");
  if (!t.allFinite() || !states.allFinite()) throw InvariantViolation("Trajectory: NaN/Inf entry");
}

namespace {

std::vector<std::string> labels_or_default(const LinearSde& sys) {
  if (!sys.labels.empty()) return sys.labels;
  std::vector<std::string> out;
  for (Eigen::Index i = 0; i < sys.dim(); ++i) out.push_back("x" + std::to_string(i));
  return out;
}

// Exact one-step map for a fixed step length. The deterministic part is the
// exponential of an augmented generator whose extra states are 1 and the
// (sin, cos) pair of every sinusoid, so the drive integral is exact.
class ExactStep {
 public:
  ExactStep(const LinearSde& sys, double h, bool with_noise = true) {
    const Eigen::Index n = sys.dim();
    std::vector<std::pair<Eigen::Index, DriveTerm>> sines;
    VectorXd constants = VectorXd::Zero(n);
    for (std::size_t i = 0; i < sys.drive.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      constants(row) = sys.drive[i].constant;
      if (sys.drive[i].has_sinusoid()) sines.emplace_back(row, sys.drive[i]);
    }
    const Eigen::Index m = n + 1 + 2 * static_cast<Eigen::Index>(sines.size());
    MatrixXd g = MatrixXd::Zero(m, m);
    g.topLeftCorner(n, n) = -sys.a;
    g.block(0, n, n, 1) = constants;
    for (std::size_t k = 0; k < sines.size(); ++k) {
      const Eigen::Index s = n + 1 + 2 * static_cast<Eigen::Index>(k);
      g(sines[k].first, s) = sines[k].second.rho;
      g(s, s + 1) = sines[k].second.psi;
      g(s + 1, s) = -sines[k].second.psi;
    }
    generator_ = g;
    const MatrixXd e = expm(g * h);
    phi_ = e.topLeftCorner(n, n);
    forcing_ = e.block(0, n, n, m - n);
    psis_.reserve(sines.size());
    for (const auto& s : sines) psis_.push_back(s.second.psi);

    aug_.resize(m - n);
    if (!with_noise) return;
    const MatrixXd bbt = sys.b * sys.b.transpose();
    const DiscreteTransition tr = van_loan(sys.a, bbt, h);
    const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(tr.q);
    if (eig.info() != Eigen::Success)
      throw NumericalFailure("simulate_linear: eigen-decomposition of noise covariance failed");
    const VectorXd lam = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    chol_ = eig.eigenvectors() * lam.asDiagonal();
  }

  // Deterministic flow over an arbitrary span, from the augmented generator.
  VectorXd flow(double t0, const VectorXd& x, double span) {
    fill_aug(t0);
    const MatrixXd e = expm(generator_ * span);
    const Eigen::Index n = x.size();
    return e.topLeftCorner(n, n) * x + e.block(0, n, n, aug_.size()) * aug_;
  }

  void apply(double t, const VectorXd& x, VectorXd& out, NoiseStream& stream) {
    fill_aug(t);
    VectorXd xi(x.size());
    for (Eigen::Index i = 0; i < xi.size(); ++i) {
      const auto d = gaussian(stream);
      xi(i) = d.value;
      stream = d.next;
    }
    out.noalias() = phi_ * x;
    out.noalias() += forcing_ * aug_;
    out.noalias() += chol_ * xi;
  }

 private:
  void fill_aug(double t) {
    aug_(0) = 1.0;
    for (std::size_t k = 0; k < psis_.size(); ++k) {
      aug_(1 + 2 * static_cast<Eigen::Index>(k)) = std::sin(psis_[k] * t);
      aug_(2 + 2 * static_cast<Eigen::Index>(k)) = std::cos(psis_[k] * t);
    }
  }

  MatrixXd generator_;
  MatrixXd phi_;
  MatrixXd forcing_;
  MatrixXd chol_;
  VectorXd aug_;
  std::vector<double> psis_;
};

Eigen::Index step_count(double horizon, double dt) {
  const double r = horizon / dt;
  const double n = std::round(r);
  if (std::abs(r - n) <= 1e-9 * std::max(1.0, n)) return static_cast<Eigen::Index>(n);
  return static_cast<Eigen::Index>(std::ceil(r));
}

VectorXd time_grid(double horizon, double dt) {
  const Eigen::Index steps = step_count(horizon, dt);
  VectorXd t(steps + 1);
  for (Eigen::Index k = 0; k <= steps; ++k) t(k) = static_cast<double>(k) * dt;
  t(steps) = horizon;
  return t;
}

void check_step(double horizon, double dt, const char* who) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument(std::string(who) + ": dt must be > 0");
  if (!(horizon >= dt) || !std::isfinite(horizon))
    throw InvalidArgument(std::string(who) + ": horizon must be >= dt");
}

}  // namespace

VectorXd deterministic_solution(const LinearSde& sys, double t) {
  sys.validate();
  if (!(t >= 0.0)) throw InvalidArgument("deterministic_solution: t must be >= 0");
  if (t == 0.0) return sys.x0;
  ExactStep step(sys, t, false);
  return step.flow(0.0, sys.x0, t);
}

Trajectory simulate_linear(const LinearSde& sys, double horizon, double dt, NoiseStream stream,
                           Scheme scheme) {
  sys.validate();
  check_step(horizon, dt, "simulate_linear");
  Trajectory traj;
  traj.t = time_grid(horizon, dt);
  traj.labels = labels_or_default(sys);
  const Eigen::Index n = sys.dim();
  const Eigen::Index len = traj.t.size();
  traj.states.resize(n, len);
  traj.states.col(0) = sys.x0;

  VectorXd x = sys.x0;
  VectorXd next(n);
  if (scheme == Scheme::Exact) {
    ExactStep regular(sys, dt);
    for (Eigen::Index k = 0; k + 1 < len; ++k) {
      const double h = traj.t(k + 1) - traj.t(k);
      if (k + 2 == len && std::abs(h - dt) > 1e-12 * dt) {
        ExactStep last(sys, h);
        last.apply(traj.t(k), x, next, stream);
      } else {
        regular.apply(traj.t(k), x, next, stream);
      }
      x.swap(next);
      traj.states.col(k + 1) = x;
    }
  } else {
    VectorXd xi(sys.noise_dim());
    for (Eigen::Index k = 0; k + 1 < len; ++k) {
      const double h = traj.t(k + 1) - traj.t(k);
      for (Eigen::Index i = 0; i < xi.size(); ++i) {
        const auto d = gaussian(stream);
        xi(i) = d.value;
        stream = d.next;
      }
      next = x + (-sys.a * x + sys.drive_at(traj.t(k))) * h + sys.b * xi * std::sqrt(h);
      x.swap(next);
      traj.states.col(k + 1) = x;
    }
  }
  if (!traj.states.allFinite())
    throw NumericalFailure("simulate_linear: state became non-finite (unstable A for this scheme?)");
  return traj;
}

CovarianceSeries propagate_covariance(const LinearSde& sys, const MatrixXd& w0, double horizon,
                                      double dt) {
  sys.validate();
  check_step(horizon, dt, "propagate_covariance");
  const Eigen::Index n = sys.dim();
  if (w0.rows() != n || w0.cols() != n) throw InvalidArgument("propagate_covariance: w0 must be N x N");
  const double scale = std::max(1.0, w0.cwiseAbs().maxCoeff());
  if ((w0 - w0.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InvalidArgument("propagate_covariance: w0 is not symmetric");
  const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(w0, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-12 * scale)
    throw InvalidArgument("propagate_covariance: w0 is not positive semidefinite");

  CovarianceSeries out;
  out.t = time_grid(horizon, dt);
  out.w.reserve(static_cast<std::size_t>(out.t.size()));
  const MatrixXd bbt = sys.b * sys.b.transpose();
  MatrixXd w = (w0 + w0.transpose()) / 2;
  out.w.push_back(w);
  for (Eigen::Index k = 0; k + 1 < out.t.size(); ++k) {
    w = lyapunov_rk4_step(sys.a, w, bbt, out.t(k + 1) - out.t(k));
    out.w.push_back(w);
  }
  return out;
}

MatrixXd stationary_covariance(const LinearSde& sys) {
  sys.validate();
  return solve_lyapunov(sys.a, (sys.b * sys.b.transpose()).eval());
}

DiscreteTransition transition_covariance(const LinearSde& sys, double dt) {
  sys.validate();
  if (!(dt > 0.0)) throw InvalidArgument("transition_covariance: dt must be > 0");
  return van_loan(sys.a, (sys.b * sys.b.transpose()).eval(), dt);
}

void write_csv(std::ostream& os, const Trajectory& traj) {
  os << 't';
  for (const auto& l : traj.labels) os << ',' << l;
  os << '\n';
  char buf[32];
  for (Eigen::Index k = 0; k < traj.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", traj.t(k));
    os << buf;
    for (Eigen::Index i = 0; i < traj.states.rows(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", traj.states(i, k));
      os << ',' << buf;
    }
    os << '\n';
  }
}

}  // namespace freqlab
