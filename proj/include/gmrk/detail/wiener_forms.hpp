#pragma once

#include <algorithm>
#include <cmath>

#include "gmrk/errors.hpp"

namespace gmrk::detail {

// Unit-scale closed forms of the q-times integrated Wiener kernels and the
// dt2-derivative surface, valid for t, t2 >= 0 (both vanish when an argument
// is zero). Branches are written in (min, max) form; ties take the t <= t2
// branch, on which the two branches agree.

inline double iw_k(int q, double t, double t2) {
  const double mn = std::min(t, t2);
  const double mx = std::max(t, t2);
  const double d = mx - mn;
  switch (q) {
    case 0:
      return mn;
    case 1:
      return mn * mn * mn / 3.0 + d * mn * mn / 2.0;
    case 2:
      return std::pow(mn, 5) / 20.0 + d / 12.0 * ((t + t2) * mn * mn * mn - std::pow(mn, 4) / 2.0);
    case 3:
      return std::pow(mn, 7) / 252.0 +
             d * std::pow(mn, 4) / 720.0 * (5.0 * mx * mx + 2.0 * t * t2 + 3.0 * mn * mn);
    default:
      throw DomainError("integrated Wiener kernel: q must be in 0..3");
  }
}

inline double iw_kd(int q, double t, double t2) {
  const bool upper = t > t2;
  switch (q) {
    case 0:
      return upper ? 1.0 : 0.0;
    case 1:
      return upper ? t * t2 - t2 * t2 / 2.0 : t * t / 2.0;
    case 2:
      return upper ? t2 * t2 / 24.0 * (t2 * t2 - 4.0 * t * t2 + 6.0 * t * t)
                   : -std::pow(t, 4) / 24.0 + t2 * t * t * t / 6.0;
    case 3:
      return upper ? std::pow(t2, 3) / 720.0 *
                         (20.0 * t * t * t - 15.0 * t * t * t2 + 6.0 * t * t2 * t2 - t2 * t2 * t2)
                   : std::pow(t, 4) / 720.0 * (15.0 * t2 * t2 - 6.0 * t * t2 + t * t);
    default:
      throw DomainError("integrated Wiener kernel: q must be in 0..3");
  }
}

}  // namespace gmrk::detail
