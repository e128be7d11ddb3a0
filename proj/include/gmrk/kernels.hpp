#pragma once

#include <functional>

#include "gmrk/errors.hpp"

namespace gmrk {

enum class KernelFamily { IntegratedWiener, SquaredExponential };

/// Covariance model: q-times integrated Wiener process (q = 0..3) or the
/// squared-exponential baseline.
///
/// Wiener kernels are evaluated at inputs already shifted by the process
/// offset tau (t = t_raw - tau); callers perform the shift and the shifted
/// inputs must be positive. The offset is stored only so that callers can
/// carry it alongside the other hyperparameters.
struct KernelModel {
  KernelFamily family = KernelFamily::IntegratedWiener;
  int q = 1;                 // integration count, Wiener family only
  double sigma2 = 1.0;       // output scale
  double tau = 0.0;          // process offset, Wiener family only
  double lengthscale = 1.0;  // SE family only

  static KernelModel integrated_wiener(int q, double sigma2 = 1.0, double tau = 0.0);
  static KernelModel squared_exponential(double sigma2, double lengthscale);
};

/// k(t, t2)
double k(const KernelModel& m, double t, double t2);
/// dk(t, t2) / dt2
double kd(const KernelModel& m, double t, double t2);
/// dk(t, t2) / dt
double dk(const KernelModel& m, double t, double t2);
/// d^2 k(t, t2) / dt dt2
double dkd(const KernelModel& m, double t, double t2);

/// A stationary kernel given as a function of the squared scaled distance
/// r = (t - t2)^2 / h^2, together with its first two r-derivatives.
struct StationaryKernel1D {
  std::function<double(double)> k;
  std::function<double(double)> dk_dr;
  std::function<double(double)> d2k_dr2;
};

struct StationaryDerivatives {
  double k = 0.0;
  double kd = 0.0;
  double dkd = 0.0;
};

/// Evaluates k, dk/dt2 and d^2k/dt dt2 of a stationary kernel through the
/// chain rule in r = (t - t2)^2 / h^2.
StationaryDerivatives stationary_derivatives(const StationaryKernel1D& kr, double h, double t,
                                             double t2);

}  // namespace gmrk
