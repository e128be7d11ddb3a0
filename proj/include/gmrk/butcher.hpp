#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gmrk/errors.hpp"

namespace gmrk {

using Vec = Eigen::VectorXd;

/// Right-hand side of an ODE: maps (state, time) to the state derivative.
using Rhs = std::function<Vec(const Vec&, double)>;

/// Initial value problem on [t0, tH], optionally with a known solution.
struct IVProblem {
  Rhs f;
  double t0 = 0.0;
  Vec x0;
  double tH = 1.0;
  std::function<Vec(double)> exact;  // empty when no closed-form solution is known

  static IVProblem scalar(std::function<double(double, double)> rhs, double t0, double x0,
                          double tH, std::function<double(double)> exact = nullptr);

  /// Throws DomainError if tH <= t0 or exact(t0) deviates from x0 by more than 1e-14.
  void validate() const;
};

/// Coefficients of an explicit Runge-Kutta method.
///
/// W is strictly lower triangular, c holds the node fractions (c[0] = 0),
/// b the output weights, p the claimed order.
struct Tableau {
  int s = 0;
  Eigen::VectorXd c;
  Eigen::MatrixXd W;
  Eigen::VectorXd b;
  int p = 0;
};

/// Euler's method: the only consistent one-stage method.
Tableau tableau_euler();

/// The one-parameter family of second-order two-stage methods, alpha in (0, 1].
/// alpha = 1/2 is the midpoint rule, alpha = 1 is Heun's method.
Tableau tableau_second_order(double alpha);

/// The two-parameter family of third-order three-stage methods, u, v in (0, 1].
/// Rejects the singular combinations u = v and u = 2/3.
Tableau tableau_third_order(double u, double v);

struct OrderConditionReport {
  int order = 0;
  bool pass = false;
  struct Entry {
    std::string name;
    double value = 0.0;
    double target = 0.0;
    double residual = 0.0;
  };
  std::vector<Entry> conditions;
};

/// Checks the classical order conditions up to p in {1, 2, 3} at tolerance 1e-12.
OrderConditionReport check_order_conditions(const Tableau& tab, int p);

struct RkStepResult {
  Vec x1;
  std::vector<Vec> stage_derivs;  // y_i = f(xhat_i, t0 + h c_i)
};

/// One explicit RK step of size h > 0 from (t0, x0).
/// Throws EvaluationError when f returns a non-finite value at some stage.
RkStepResult rk_step(const Tableau& tab, const Rhs& f, double t0, const Vec& x0, double h);

/// Chains rk_step over n uniform steps; returns the states at t0 + k h, k = 0..n.
std::vector<Vec> rk_chain(const Tableau& tab, const Rhs& f, double t0, const Vec& x0, double h,
                          int n);

}  // namespace gmrk
