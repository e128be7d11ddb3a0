// Test-only reference implementations, independent of the library's solve
// paths: extended-precision batch GP posteriors through the plain joint-Gram
// formulas, plus small generic helpers. Used to validate the closed-form
// limit posteriors at very large finite anchors, where double precision
// cannot survive the cancellation.
#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <stdexcept>
#include <vector>

namespace mp_oracle {

using Real = boost::multiprecision::cpp_bin_float_50;

inline Real iw_k(int q, const Real& t, const Real& t2) {
  const Real mn = t < t2 ? t : t2;
  const Real mx = t < t2 ? t2 : t;
  const Real d = mx - mn;
  switch (q) {
    case 0:
      return mn;
    case 1:
      return mn * mn * mn / 3 + d * mn * mn / 2;
    case 2:
      return pow(mn, 5) / 20 + d / 12 * ((t + t2) * mn * mn * mn - pow(mn, 4) / 2);
    case 3:
      return pow(mn, 7) / 252 + d * pow(mn, 4) / 720 * (5 * mx * mx + 2 * t * t2 + 3 * mn * mn);
    default:
      throw std::invalid_argument("iw_k: q out of range");
  }
}

inline Real iw_kd(int q, const Real& t, const Real& t2) {
  const bool upper = t > t2;
  switch (q) {
    case 1:
      return upper ? t * t2 - t2 * t2 / 2 : t * t / 2;
    case 2:
      return upper ? t2 * t2 / 24 * (t2 * t2 - 4 * t * t2 + 6 * t * t)
                   : -pow(t, 4) / 24 + t2 * t * t * t / 6;
    case 3:
      return upper ? pow(t2, 3) / 720 * (20 * t * t * t - 15 * t * t * t2 + 6 * t * t2 * t2 -
                                         t2 * t2 * t2)
                   : pow(t, 4) / 720 * (15 * t2 * t2 - 6 * t * t2 + t * t);
    default:
      throw std::invalid_argument("iw_kd: q out of range");
  }
}

// Gaussian elimination with partial pivoting; A is n x n row-major.
inline std::vector<Real> solve(std::vector<std::vector<Real>> A, std::vector<Real> b) {
  const size_t n = A.size();
  for (size_t k = 0; k < n; ++k) {
    size_t piv = k;
    for (size_t i = k + 1; i < n; ++i) {
      if (abs(A[i][k]) > abs(A[piv][k])) piv = i;
    }
    std::swap(A[k], A[piv]);
    std::swap(b[k], b[piv]);
    for (size_t i = k + 1; i < n; ++i) {
      const Real f = A[i][k] / A[k][k];
      for (size_t j = k; j < n; ++j) A[i][j] -= f * A[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<Real> x(n);
  for (size_t i = n; i-- > 0;) {
    Real s = b[i];
    for (size_t j = i + 1; j < n; ++j) s -= A[i][j] * x[j];
    x[i] = s / A[i][i];
  }
  return x;
}

/// Batch GP posterior for the q-times integrated Wiener prior conditioned on
/// a value observation at t0 and derivative observations at t0 + offsets.
struct BatchPosterior {
  int q;
  Real t0;
  std::vector<Real> deriv_times;
  std::vector<std::vector<Real>> gram;

  BatchPosterior(int q_, const Real& t0_, const std::vector<Real>& offsets) : q(q_), t0(t0_) {
    for (const Real& d : offsets) deriv_times.push_back(t0 + d);
    const size_t n = 1 + deriv_times.size();
    gram.assign(n, std::vector<Real>(n));
    gram[0][0] = iw_k(q, t0, t0);
    for (size_t j = 0; j < deriv_times.size(); ++j) {
      gram[0][1 + j] = iw_kd(q, t0, deriv_times[j]);
      gram[1 + j][0] = gram[0][1 + j];
      for (size_t l = 0; l < deriv_times.size(); ++l) {
        gram[1 + j][1 + l] = iw_k(q - 1, deriv_times[j], deriv_times[l]);
      }
    }
  }

  std::vector<Real> cross(const Real& tq) const {
    std::vector<Real> r(1 + deriv_times.size());
    r[0] = iw_k(q, tq, t0);
    for (size_t j = 0; j < deriv_times.size(); ++j) r[1 + j] = iw_kd(q, tq, deriv_times[j]);
    return r;
  }

  /// Posterior mean weights over (x0, y_1..y_m) at query offset s from t0.
  std::vector<Real> mean_weights(const Real& s) const { return solve(gram, cross(t0 + s)); }

  /// Unit-scale posterior covariance at offsets (s, s2) from t0.
  Real cov(const Real& s, const Real& s2) const {
    const std::vector<Real> r1 = cross(t0 + s);
    const std::vector<Real> w = solve(gram, cross(t0 + s2));
    Real out = iw_k(q, t0 + s, t0 + s2);
    for (size_t i = 0; i < w.size(); ++i) out -= r1[i] * w[i];
    return out;
  }
};

}  // namespace mp_oracle
