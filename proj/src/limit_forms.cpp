#include <algorithm>
#include <cmath>

#include "gmrk/errors.hpp"
#include "gmrk/solver.hpp"

namespace gmrk {

namespace {

using std::pow;

#include "limit_branches.inc"

// Interval index of x against the ascending thresholds; ties fall to the
// interval closed on the right (the branches agree at the seams).
int classify_region(double x, const double* thresholds, int count) {
  if (!std::isfinite(x)) {
    throw BranchSelectionError("limit covariance: non-finite query offset");
  }
  for (int i = 0; i < count; ++i) {
    if (x <= thresholds[i]) return i;
  }
  return count;
}

}  // namespace

double limit_posterior_mean(int p, double c2, double c3, double h, double x0,
                            const std::vector<double>& y, double s) {
  if (p < 1 || p > 3) throw DomainError("limit_posterior_mean: p must be 1, 2 or 3");
  if (!(h > 0.0)) throw DomainError("limit_posterior_mean: h must be positive");
  if (static_cast<int>(y.size()) > p) {
    throw DomainError("limit_posterior_mean: more stage derivatives than stages");
  }
  switch (y.size()) {
    case 0:
      return x0;
    case 1:
      return x0 + s * y[0];
    case 2: {
      const double w2 = s * s / (2.0 * h * c2);
      return x0 + (s - w2) * y[0] + w2 * y[1];
    }
    case 3: {
      const double uu = c2, vv = c3;
      const double w1 = s - (h * (s * s * uu / 2.0 + s * s * vv / 2.0) - s * s * s / 3.0) /
                                (h * h * uu * vv);
      const double w2 = s * s * (2.0 * s - 3.0 * h * vv) / (6.0 * h * h * uu * (uu - vv));
      const double w3 = -s * s * (2.0 * s - 3.0 * h * uu) / (6.0 * h * h * vv * (uu - vv));
      return x0 + w1 * y[0] + w2 * y[1] + w3 * y[2];
    }
    default:
      throw DomainError("limit_posterior_mean: unsupported observation count");
  }
}

double limit_posterior_cov(int p, double c2, double c3, double h, double s, double s2,
                           double sigma2) {
  if (p < 1 || p > 3) throw DomainError("limit_posterior_cov: p must be 1, 2 or 3");
  if (!(h > 0.0)) throw DomainError("limit_posterior_cov: h must be positive");
  // Branch forms are derived in step units with ascending stage offsets; the
  // covariance depends on the observation times only, so sorting the stage
  // fractions is exact.
  double a = std::max(s, s2) / h;
  double b = std::min(s, s2) / h;
  const double scale = sigma2 * std::pow(h, 2 * p + 1);
  switch (p) {
    case 1: {
      const double thr[] = {0.0};
      return scale * wp1_branch(classify_region(a, thr, 1), classify_region(b, thr, 1), a, b);
    }
    case 2: {
      const double thr[] = {0.0, c2};
      return scale *
             wp2_branch(classify_region(a, thr, 2), classify_region(b, thr, 2), a, b, c2);
    }
    default: {
      const double lo = std::min(c2, c3);
      const double hi = std::max(c2, c3);
      const double thr[] = {0.0, lo, hi};
      return scale *
             wp3_branch(classify_region(a, thr, 3), classify_region(b, thr, 3), a, b, lo, hi);
    }
  }
}

}  // namespace gmrk
