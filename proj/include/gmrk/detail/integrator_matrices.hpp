#pragma once

#include <Eigen/Dense>

namespace gmrk::detail {

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

/// exp(F dt) for the integrator chain drift F (superdiagonal ones), size (q+1).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> transition(int q, Scalar dt) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Mat A = Mat::Zero(q + 1, q + 1);
  for (int i = 0; i <= q; ++i) {
    Scalar term = Scalar(1);
    for (int j = i; j <= q; ++j) {
      A(i, j) = term;
      term *= dt / Scalar(j - i + 1);
    }
  }
  return A;
}

/// Unit-scale process noise integral int_0^dt exp(F s) L L^T exp(F^T s) ds.
/// Entry (i, j) is dt^(2q+1-i-j) / ((2q+1-i-j) (q-i)! (q-j)!).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> process_noise(int q, Scalar dt) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Mat Q = Mat::Zero(q + 1, q + 1);
  for (int i = 0; i <= q; ++i) {
    for (int j = 0; j <= q; ++j) {
      const int p = 2 * q + 1 - i - j;
      Scalar dtp = Scalar(1);
      for (int e = 0; e < p; ++e) dtp *= dt;
      Q(i, j) = dtp / (Scalar(p) * Scalar(factorial(q - i)) * Scalar(factorial(q - j)));
    }
  }
  return Q;
}

/// The dt-free coefficient matrix of process_noise: Q(dt) = D Qc D with
/// D = diag(dt^(q + 1/2 - i)).
inline Eigen::MatrixXd process_noise_coeffs(int q) {
  Eigen::MatrixXd Qc(q + 1, q + 1);
  for (int i = 0; i <= q; ++i) {
    for (int j = 0; j <= q; ++j) {
      const int p = 2 * q + 1 - i - j;
      Qc(i, j) = 1.0 / (p * factorial(q - i) * factorial(q - j));
    }
  }
  return Qc;
}

}  // namespace gmrk::detail
