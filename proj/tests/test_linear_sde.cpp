#include <cmath>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "freqlab/errors.hpp"
#include "freqlab/expm.hpp"
#include "freqlab/linear_sde.hpp"
#include "freqlab/lyapunov.hpp"
#include "freqlab/oracle.hpp"
#include "freqlab/stats.hpp"
#include "helpers.hpp"

using namespace freqlab;

namespace {

LinearSde reference_system(double h = 3.0, double d_l = 2.0, double alpha = 0.5, double b = 1.0) {
  SimplifiedSystem s;
  s.h = h;
  s.d_l = d_l;
  s.ou = OuParams{0.0, alpha, b, 0.0};
  return to_linear_sde(s);
}

MatrixXd random_matrix(std::uint64_t seed, Eigen::Index n, double scale) {
  MatrixXd m(n, n);
  NoiseStream s{seed, 0};
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const auto d = gaussian(s);
    m.data()[i] = scale * d.value;
    s = d.next;
  }
  return m;
}

}  // namespace

TEST_CASE("expm agrees with Eigen's MatrixFunctions module") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    for (double scale : {1e-3, 0.5, 3.0, 40.0}) {
      const MatrixXd a = random_matrix(seed, 4, scale / 4.0);
      const MatrixXd mine = expm(a);
      const MatrixXd ref = a.exp();
      CHECK((mine - ref).norm() <= 1e-11 * std::max(1.0, ref.norm()));
    }
  }
}

TEST_CASE("expm simple cases") {
  CHECK(expm(MatrixXd::Zero(3, 3)).isApprox(MatrixXd::Identity(3, 3)));
  Eigen::Matrix2d rot;
  rot << 0, 1, -1, 0;
  const Eigen::Matrix2d e = expm(rot * M_PI);
  CHECK(e(0, 0) == doctest::Approx(-1.0));
  CHECK(std::abs(e(0, 1)) < 1e-14);
  CHECK_THROWS_AS(expm(MatrixXd::Zero(2, 3)), InvalidArgument);
  MatrixXd bad = MatrixXd::Zero(2, 2);
  bad(0, 0) = NAN;
  CHECK_THROWS_AS(expm(bad), NumericalFailure);
  CHECK_THROWS_AS(expm(MatrixXd::Identity(2, 2) * 1e4), NumericalFailure);
}

TEST_CASE("expm works in long double") {
  Eigen::Matrix<long double, 2, 2> a;
  a << -1.0L, 0.5L, 0.0L, -2.0L;
  const auto e = expm(a);
  CHECK(static_cast<double>(e(0, 0)) == doctest::Approx(std::exp(-1.0)));
  CHECK(static_cast<double>(e(1, 1)) == doctest::Approx(std::exp(-2.0)));
}

TEST_CASE("solve_lyapunov satisfies the balance equation") {
  const LinearSde sys = reference_system();
  const MatrixXd bbt = sys.b * sys.b.transpose();
  const MatrixXd w = solve_lyapunov(sys.a, bbt);
  CHECK((sys.a * w + w * sys.a.transpose() - bbt).norm() < 1e-13);
  CHECK(w(0, 0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(w(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("van_loan agrees with the integrated covariance and exp(-A dt)") {
  const LinearSde sys = reference_system();
  const MatrixXd bbt = sys.b * sys.b.transpose();
  for (double dt : {0.01, 1.0, 7.0}) {
    const auto vl = van_loan(sys.a, bbt, dt);
    const MatrixXd phi = (-sys.a * dt).exp();
    CHECK((vl.phi - phi).norm() < 1e-13);
    // Q(dt) = W∞ − Φ W∞ Φᵀ for a stable system.
    const MatrixXd winf = solve_lyapunov(sys.a, bbt);
    CHECK((vl.q - (winf - phi * winf * phi.transpose())).norm() < 1e-12);
  }
  const auto longspan = integrated_covariance(sys.a, bbt, 5000.0);
  CHECK(longspan.q(0, 0) == doctest::Approx(0.1).epsilon(1e-10));
}

TEST_CASE("LinearSde validation") {
  LinearSde s = reference_system();
  CHECK_NOTHROW(s.validate());
  s.b = MatrixXd::Zero(3, 1);
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s = reference_system();
  s.drive = {DriveTerm::constant_term(0.0), DriveTerm::sinusoid(1.0, -1.0)};
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
}

TEST_CASE("null dynamics give an identically zero trajectory") {
  LinearSde s = reference_system(3.0, 2.0, 0.5, 0.0);
  const Trajectory tr = simulate_linear(s, 100.0, 0.1, NoiseStream{1, 0});
  CHECK(tr.states.cwiseAbs().maxCoeff() == 0.0);
  CHECK(tr.size() == 1001);
  CHECK(tr.t(1000) == doctest::Approx(100.0));
  CHECK_NOTHROW(tr.validate());
}

TEST_CASE("simulate_linear rejects bad steps") {
  const LinearSde s = reference_system();
  CHECK_THROWS_AS(simulate_linear(s, 10.0, 0.0, NoiseStream{1, 0}), InvalidArgument);
  CHECK_THROWS_AS(simulate_linear(s, 0.05, 0.1, NoiseStream{1, 0}), InvalidArgument);
}

TEST_CASE("shortened final step lands exactly on the horizon") {
  const Trajectory tr = simulate_linear(reference_system(), 1.05, 0.1, NoiseStream{1, 0});
  CHECK(tr.t(tr.size() - 1) == doctest::Approx(1.05).epsilon(1e-15));
  CHECK_NOTHROW(tr.validate());
}

TEST_CASE("simulate_linear is bit-identical per seed") {
  const LinearSde s = reference_system();
  const Trajectory a = simulate_linear(s, 500.0, 0.5, NoiseStream{5, 0});
  const Trajectory b = simulate_linear(s, 500.0, 0.5, NoiseStream{5, 0});
  const Trajectory c = simulate_linear(s, 500.0, 0.5, NoiseStream{6, 0});
  CHECK(a.states == b.states);
  CHECK(a.t == b.t);
  CHECK(a.states != c.states);
}

TEST_CASE("stationary variance of one 86400 s path") {
  const LinearSde s = reference_system();
  const Trajectory tr = simulate_linear(s, 86400.0 + 600.0, 1.0, NoiseStream{11, 0});
  std::vector<double> x;
  for (Eigen::Index i = 600; i < tr.size(); ++i) x.push_back(tr.states(0, i));
  CHECK(test::rel_err(variance_of(x), 0.1) < 0.05);
}

TEST_CASE("Euler-Maruyama scheme approaches the same stationary variance") {
  const LinearSde s = reference_system();
  const Trajectory tr = simulate_linear(s, 20000.0, 0.01, NoiseStream{12, 0}, Scheme::EulerMaruyama);
  std::vector<double> x;
  for (Eigen::Index i = 60000; i < tr.size(); i += 100) x.push_back(tr.states(0, i));
  CHECK(test::rel_err(variance_of(x), 0.1) < 0.1);
}

TEST_CASE("noise-free sinusoidal drive follows the closed-form mean") {
  SimplifiedSystem sys;
  sys.ou = OuParams{0.0, 0.5, 0.0, 0.0};
  sys.drive = Sinusoid{0.01, 2.0 * M_PI / 600.0};
  const Trajectory tr = simulate_linear(to_linear_sde(sys), 1200.0, 0.5, NoiseStream{1, 0});
  double max_err = 0.0, max_abs = 0.0;
  for (Eigen::Index i = 0; i < tr.size(); ++i) {
    const double ref = mean_delta_omega(tr.t(i), sys);
    max_err = std::max(max_err, std::abs(tr.states(0, i) - ref));
    max_abs = std::max(max_abs, std::abs(ref));
  }
  CHECK(max_abs > 0.0);
  CHECK(max_err / max_abs < 1e-6);
}

TEST_CASE("deterministic_solution over long horizons stays finite") {
  SimplifiedSystem sys;
  sys.ou = OuParams{0.0, 0.5, 0.0, 0.0};
  sys.drive = Sinusoid{0.01, 2.0 * M_PI / 86400.0};
  const VectorXd x = deterministic_solution(to_linear_sde(sys), 2e5);
  CHECK(x.allFinite());
  CHECK(x(0) == doctest::Approx(mean_delta_omega(2e5, sys)).epsilon(1e-6));
}

TEST_CASE("propagate_covariance: zero noise from zero start stays zero") {
  const auto cs = propagate_covariance(reference_system(3, 2, 0.5, 0.0), MatrixXd::Zero(2, 2), 10.0, 0.01);
  for (const auto& w : cs.w) CHECK(w.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("propagate_covariance matches the closed-form variance") {
  SimplifiedSystem sys;
  const auto cs = propagate_covariance(to_linear_sde(sys), MatrixXd::Zero(2, 2), 20.0, 0.001);
  for (double t : {1.0, 5.0, 20.0}) {
    const auto i = static_cast<std::size_t>(std::lround(t / 0.001));
    CHECK(cs.t(static_cast<Eigen::Index>(i)) == doctest::Approx(t));
    CHECK(test::rel_err(cs.w[i](0, 0), var_delta_omega(t, sys)) < 1e-6);
  }
}

TEST_CASE("propagate_covariance tends to the stationary balance") {
  const LinearSde s = reference_system();
  const auto cs = propagate_covariance(s, MatrixXd::Zero(2, 2), 200.0, 0.01);
  CHECK(cs.w.back()(0, 0) == doctest::Approx(0.1).epsilon(1e-9));
  CHECK((cs.w.back() - stationary_covariance(s)).norm() < 1e-9);
}

TEST_CASE("propagate_covariance outputs are symmetric and PSD") {
  const auto cs = propagate_covariance(reference_system(1.3, 0.4, 0.9, 2.0), MatrixXd::Zero(2, 2), 30.0, 0.01);
  for (const auto& w : cs.w) {
    CHECK((w - w.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(w.diagonal().minCoeff() >= -1e-12);
    CHECK(Eigen::SelfAdjointEigenSolver<MatrixXd>(w).eigenvalues().minCoeff() >= -1e-12);
  }
}

TEST_CASE("propagate_covariance rejects asymmetric or indefinite w0") {
  MatrixXd w0(2, 2);
  w0 << 1, 0.5, 0.2, 1;
  CHECK_THROWS_AS(propagate_covariance(reference_system(), w0, 1.0, 0.1), InvalidArgument);
  w0 << -1, 0, 0, 1;
  CHECK_THROWS_AS(propagate_covariance(reference_system(), w0, 1.0, 0.1), InvalidArgument);
}

TEST_CASE("covariance is bit-identical across drives") {
  LinearSde a = reference_system();
  LinearSde b = a;
  b.drive = {DriveTerm::constant_term(0.0), DriveTerm::sinusoid(0.3, 0.01)};
  const auto ca = propagate_covariance(a, MatrixXd::Zero(2, 2), 50.0, 0.01);
  const auto cb = propagate_covariance(b, MatrixXd::Zero(2, 2), 50.0, 0.01);
  REQUIRE(ca.w.size() == cb.w.size());
  for (std::size_t i = 0; i < ca.w.size(); ++i) CHECK(ca.w[i] == cb.w[i]);
  CHECK(transition_covariance(a, 1.0).q == transition_covariance(b, 1.0).q);
}

TEST_CASE("trajectory CSV export") {
  const Trajectory tr = simulate_linear(reference_system(), 2.0, 1.0, NoiseStream{1, 0});
  std::ostringstream os;
  write_csv(os, tr);
  std::istringstream is(os.str());
  std::string header, row;
  std::getline(is, header);
  CHECK(header == "t,delta_omega,eta");
  std::getline(is, row);
  std::getline(is, row);
  const double eta1 = std::stod(row.substr(row.rfind(',') + 1));
  CHECK(eta1 == tr.states(1, 1));  // 17 digits round-trip exactly
  CHECK(tr.component("eta") == 1);
  CHECK_THROWS_AS(tr.component("nope"), InvalidArgument);
}

TEST_CASE("Trajectory validation catches non-increasing time and NaN") {
  Trajectory tr = simulate_linear(reference_system(), 3.0, 1.0, NoiseStream{1, 0});
  Trajectory bad = tr;
  bad.t(2) = bad.t(1);
  CHECK_THROWS_AS(bad.validate(), InvariantViolation);
  bad = tr;
  bad.states(0, 1) = NAN;
  CHECK_THROWS_AS(bad.validate(), InvariantViolation);
}
