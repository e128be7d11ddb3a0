#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gmrk/errors.hpp"

namespace gmrk {

/// The q-times integrated Wiener process as a (q+1)-dimensional linear
/// Gaussian state-space model dX = F X dt + L dW, state (x, x', ..., x^(q)),
/// started with exact zero state at the process origin.
struct IntegratorSSM {
  int q = 1;
  double sigma2 = 1.0;

  Eigen::MatrixXd F() const;  // superdiagonal ones, nilpotent
  Eigen::VectorXd L() const;  // selects the last state component
};

IntegratorSSM make_integrator_ssm(int q, double sigma2 = 1.0);

struct Discretization {
  Eigen::MatrixXd A;  // exp(F h), a finite polynomial in h
  Eigen::MatrixXd Q;  // sigma2 * int_0^h exp(F s) L L' exp(F' s) ds
};

Discretization discretize(const IntegratorSSM& ssm, double h);

struct FilterPoint {
  double t = 0.0;
  double mean = 0.0;
  double var = 0.0;
};

/// Kalman filter plus Rauch-Tung-Striebel smoother over one value
/// observation and noise-free derivative observations, reporting the
/// smoothed marginal of the x component at each query point. Times are in
/// process coordinates (origin at 0) and must be positive and sorted.
std::vector<FilterPoint> filter(const IntegratorSSM& ssm, double t_value, double x_value,
                                const std::vector<double>& deriv_times,
                                const std::vector<double>& deriv_values,
                                const std::vector<double>& query_grid);

}  // namespace gmrk
