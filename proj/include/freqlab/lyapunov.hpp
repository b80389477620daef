#pragma once

// Dense Lyapunov-type kernels shared by the SDE core and the oracle. Every
// function is a template over Eigen expressions so the same code runs in
// double for simulation and in long double for reference checks.

#include <Eigen/Dense>
#include <cmath>

#include "freqlab/errors.hpp"
#include "freqlab/expm.hpp"

namespace freqlab {

/// Right-hand side of the differential Lyapunov equation ẇ = −(Aw + wAᵀ) + BBᵀ.
template <typename DA, typename DW, typename DQ>
Eigen::Matrix<typename DA::Scalar, Eigen::Dynamic, Eigen::Dynamic> lyapunov_rhs(
    const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DW>& w,
    const Eigen::MatrixBase<DQ>& bbt) {
  return -(a * w + w * a.transpose()) + bbt;
}

/// One classical RK4 step of the differential Lyapunov equation, followed by
/// explicit symmetrization so round-off never accumulates into skew parts.
template <typename DA, typename DW, typename DQ>
Eigen::Matrix<typename DA::Scalar, Eigen::Dynamic, Eigen::Dynamic> lyapunov_rk4_step(
    const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DW>& w,
    const Eigen::MatrixBase<DQ>& bbt, typename DA::Scalar h) {
  using Mat = Eigen::Matrix<typename DA::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Mat k1 = lyapunov_rhs(a, w, bbt);
  const Mat k2 = lyapunov_rhs(a, (w + (h / 2) * k1).eval(), bbt);
  const Mat k3 = lyapunov_rhs(a, (w + (h / 2) * k2).eval(), bbt);
  const Mat k4 = lyapunov_rhs(a, (w + h * k3).eval(), bbt);
  Mat next = w + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
  return (next + next.transpose()) / 2;
}

/// Solves Aw + wAᵀ = Q through the Kronecker form (I⊗A + A⊗I)vec(w) = vec(Q).
/// Intended for the small state dimensions used here (N ≤ 8).
template <typename DA, typename DQ>
Eigen::Matrix<typename DA::Scalar, Eigen::Dynamic, Eigen::Dynamic> solve_lyapunov(
    const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DQ>& q) {
  using Scalar = typename DA::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index n = a.rows();
  Mat k = Mat::Zero(n * n, n * n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      // Row index of w(i, j) in column-major vec(w) is j*n + i.
      for (Eigen::Index p = 0; p < n; ++p) {
        k(j * n + i, j * n + p) += a(i, p);  // (A w)(i, j)
        k(j * n + i, p * n + i) += a(j, p);  // (w Aᵀ)(i, j)
      }
    }
  const Eigen::FullPivLU<Mat> lu(k);
  if (!lu.isInvertible())
    throw NumericalFailure("solve_lyapunov: A has eigenvalues summing to zero; no stationary solution");
  const Vec rhs = Eigen::Map<const Vec>(Mat(q).data(), n * n);
  const Vec sol = lu.solve(rhs);
  Mat w = Eigen::Map<const Mat>(sol.data(), n, n);
  return (w + w.transpose()) / 2;
}

template <typename Scalar>
struct DiscreteTransitionT {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> phi;  ///< e^{−A·dt}
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> q;    ///< ∫₀^dt e^{−As}BBᵀe^{−Aᵀs}ds
};

/// Van Loan's block-exponential construction of the one-step transition and
/// integrated noise covariance for dx = −Ax dt + B dW.
template <typename DA, typename DQ>
DiscreteTransitionT<typename DA::Scalar> van_loan(const Eigen::MatrixBase<DA>& a,
                                                   const Eigen::MatrixBase<DQ>& bbt,
                                                   typename DA::Scalar dt) {
  using Scalar = typename DA::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = a.rows();
  Mat c = Mat::Zero(2 * n, 2 * n);
  c.topLeftCorner(n, n) = a * dt;
  c.topRightCorner(n, n) = bbt * dt;
  c.bottomRightCorner(n, n) = -a.transpose() * dt;
  const Mat f = expm(c);
  DiscreteTransitionT<Scalar> out;
  out.phi = f.bottomRightCorner(n, n).transpose();
  const Mat q = out.phi * f.topRightCorner(n, n);
  out.q = (q + q.transpose()) / 2;
  return out;
}

/// Transition and integrated covariance over a long span. Van Loan is applied
/// on span/2^k with ‖A‖·span/2^k ≤ 1 and the result is doubled k times via
/// Q(2h) = Q(h) + Φ(h)Q(h)Φ(h)ᵀ, which avoids the e^{+Aᵀt} overflow of the
/// direct block exponential.
template <typename DA, typename DQ>
DiscreteTransitionT<typename DA::Scalar> integrated_covariance(const Eigen::MatrixBase<DA>& a,
                                                               const Eigen::MatrixBase<DQ>& bbt,
                                                               typename DA::Scalar span) {
  using Scalar = typename DA::Scalar;
  using std::ceil;
  using std::log2;
  const Scalar norm = a.cwiseAbs().colwise().sum().maxCoeff() * span;
  int k = 0;
  if (norm > Scalar(1)) k = static_cast<int>(ceil(log2(norm)));
  auto tr = van_loan(a, bbt, span / static_cast<Scalar>(std::ldexp(1.0, k)));
  for (int i = 0; i < k; ++i) {
    auto q = (tr.q + tr.phi * tr.q * tr.phi.transpose()).eval();
    tr.q = (q + q.transpose()) / 2;
    tr.phi = (tr.phi * tr.phi).eval();
  }
  return tr;
}

}  // namespace freqlab
