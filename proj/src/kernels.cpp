#include "gmrk/kernels.hpp"

#include <cmath>

#include "gmrk/detail/wiener_forms.hpp"

namespace gmrk {

namespace {

using detail::iw_k;
using detail::iw_kd;

void check_wiener_domain(double t, double t2) {
  if (!(t > 0.0) || !(t2 > 0.0)) {
    throw DomainError("integrated Wiener kernel: shifted inputs must be positive");
  }
}

}  // namespace

KernelModel KernelModel::integrated_wiener(int q, double sigma2, double tau) {
  if (q < 0 || q > 3) throw DomainError("KernelModel: integration count q must be in 0..3");
  if (!(sigma2 > 0.0)) throw DomainError("KernelModel: sigma2 must be positive");
  KernelModel m;
  m.family = KernelFamily::IntegratedWiener;
  m.q = q;
  m.sigma2 = sigma2;
  m.tau = tau;
  return m;
}

KernelModel KernelModel::squared_exponential(double sigma2, double lengthscale) {
  if (!(sigma2 > 0.0)) throw DomainError("KernelModel: sigma2 must be positive");
  if (!(lengthscale > 0.0)) throw DomainError("KernelModel: lengthscale must be positive");
  KernelModel m;
  m.family = KernelFamily::SquaredExponential;
  m.sigma2 = sigma2;
  m.lengthscale = lengthscale;
  return m;
}

double k(const KernelModel& m, double t, double t2) {
  if (m.family == KernelFamily::IntegratedWiener) {
    check_wiener_domain(t, t2);
    return m.sigma2 * iw_k(m.q, t, t2);
  }
  const double d = t - t2;
  return m.sigma2 * std::exp(-d * d / (2.0 * m.lengthscale * m.lengthscale));
}

double kd(const KernelModel& m, double t, double t2) {
  if (m.family == KernelFamily::IntegratedWiener) {
    check_wiener_domain(t, t2);
    return m.sigma2 * iw_kd(m.q, t, t2);
  }
  const double l2 = m.lengthscale * m.lengthscale;
  return (t - t2) / l2 * k(m, t, t2);
}

double dk(const KernelModel& m, double t, double t2) {
  // k is symmetric, so dk/dt at (t, t2) equals dk/dt2 at (t2, t).
  return kd(m, t2, t);
}

double dkd(const KernelModel& m, double t, double t2) {
  if (m.family == KernelFamily::IntegratedWiener) {
    check_wiener_domain(t, t2);
    if (m.q == 0) {
      throw DomainError("Wiener kernel (q = 0): mixed derivative does not exist");
    }
    return m.sigma2 * iw_k(m.q - 1, t, t2);
  }
  const double l2 = m.lengthscale * m.lengthscale;
  const double d = t - t2;
  return (1.0 / l2 - d * d / (l2 * l2)) * k(m, t, t2);
}

StationaryDerivatives stationary_derivatives(const StationaryKernel1D& kr, double h, double t,
                                             double t2) {
  if (!(h > 0.0)) throw DomainError("stationary_derivatives: h must be positive");
  const double d = t - t2;
  const double r = d * d / (h * h);
  StationaryDerivatives out;
  out.k = kr.k(r);
  out.kd = kr.dk_dr(r) * (-2.0 * d / (h * h));
  out.dkd = -4.0 * d * d / (h * h * h * h) * kr.d2k_dr2(r) - 2.0 / (h * h) * kr.dk_dr(r);
  return out;
}

}  // namespace gmrk
