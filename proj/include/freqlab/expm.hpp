#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "freqlab/errors.hpp"

namespace freqlab {

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant (Higham 2005). The scaling is chosen so that the one-norm of
/// the scaled argument is below θ13 = 5.37, which keeps the backward error
/// under unit roundoff in double precision.
///
/// Throws NumericalFailure when the Padé denominator is ill conditioned or
/// the result contains non-finite entries.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>
expm(const Eigen::MatrixBase<Derived>& a_in) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>;

  if (a_in.rows() != a_in.cols()) throw InvalidArgument("expm: matrix must be square");
  if (!a_in.allFinite()) throw NumericalFailure("expm: input has non-finite entries");

  static constexpr double c[14] = {64764752532480000.0, 32382376266240000.0,
                                   7771770303897600.0,  1187353796428800.0,
                                   129060195264000.0,   10559470521600.0,
                                   670442572800.0,      33522128640.0,
                                   1323241920.0,        40840800.0,
                                   960960.0,            16380.0,
                                   182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;

  const Eigen::Index n = a_in.rows();
  Mat a = a_in;
  const double norm1 = static_cast<double>(a.cwiseAbs().colwise().sum().maxCoeff());
  int s = 0;
  if (norm1 > theta13) {
    s = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    a /= static_cast<Scalar>(std::ldexp(1.0, s));
  }

  const Mat id = Mat::Identity(n, n);
  const Mat a2 = a * a;
  const Mat a4 = a2 * a2;
  const Mat a6 = a4 * a2;
  const Mat w1 = c[13] * a6 + c[11] * a4 + c[9] * a2;
  const Mat w2 = c[7] * a6 + c[5] * a4 + c[3] * a2 + c[1] * id;
  const Mat u = a * (a6 * w1 + w2);
  const Mat z1 = c[12] * a6 + c[10] * a4 + c[8] * a2;
  const Mat v = a6 * z1 + c[6] * a6 + c[4] * a4 + c[2] * a2 + c[0] * id;

  const Eigen::PartialPivLU<Mat> lu(v - u);
  const double rcond = static_cast<double>(lu.rcond());
  if (!(rcond > 1e-12))
    throw NumericalFailure("expm: Pade denominator ill conditioned (rcond=" +
                           std::to_string(rcond) + ", scaling 2^" + std::to_string(s) + ")");
  Mat r = lu.solve(v + u);
  for (int k = 0; k < s; ++k) r = (r * r).eval();

  if (!r.allFinite())
    throw NumericalFailure("expm: result overflowed after " + std::to_string(s) + " squarings");
  return r;
}

}  // namespace freqlab
