#include "gmrk/butcher.hpp"

#include <cmath>

namespace gmrk {

namespace {
constexpr double kSingularTol = 1e-12;
}

IVProblem IVProblem::scalar(std::function<double(double, double)> rhs, double t0, double x0,
                            double tH, std::function<double(double)> exact) {
  IVProblem p;
  p.f = [rhs = std::move(rhs)](const Vec& x, double t) {
    Vec out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = rhs(x[i], t);
    return out;
  };
  p.t0 = t0;
  p.x0 = Vec::Constant(1, x0);
  p.tH = tH;
  if (exact) {
    p.exact = [exact = std::move(exact)](double t) { return Vec::Constant(1, exact(t)); };
  }
  return p;
}

void IVProblem::validate() const {
  if (!(tH > t0)) throw DomainError("IVProblem: tH must exceed t0");
  if (!f) throw DomainError("IVProblem: missing right-hand side");
  if (exact) {
    Vec e0 = exact(t0);
    if (e0.size() != x0.size() || (e0 - x0).cwiseAbs().maxCoeff() > 1e-14) {
      throw DomainError("IVProblem: exact solution does not match x0 at t0");
    }
  }
}

Tableau tableau_euler() {
  Tableau t;
  t.s = 1;
  t.c = Eigen::VectorXd::Zero(1);
  t.W = Eigen::MatrixXd::Zero(1, 1);
  t.b = Eigen::VectorXd::Constant(1, 1.0);
  t.p = 1;
  return t;
}

Tableau tableau_second_order(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw DomainError("tableau_second_order: alpha must lie in (0, 1]");
  }
  Tableau t;
  t.s = 2;
  t.c = Eigen::VectorXd::Zero(2);
  t.c[1] = alpha;
  t.W = Eigen::MatrixXd::Zero(2, 2);
  t.W(1, 0) = alpha;
  t.b = Eigen::VectorXd::Zero(2);
  t.b[0] = 1.0 - 1.0 / (2.0 * alpha);
  t.b[1] = 1.0 / (2.0 * alpha);
  t.p = 2;
  return t;
}

Tableau tableau_third_order(double u, double v) {
  if (!(u > 0.0 && u <= 1.0) || !(v > 0.0 && v <= 1.0)) {
    throw DomainError("tableau_third_order: u and v must lie in (0, 1]");
  }
  if (std::abs(u - v) < kSingularTol) {
    throw DomainError("tableau_third_order: u = v makes the v - u weight denominators vanish");
  }
  if (std::abs(2.0 - 3.0 * u) < kSingularTol) {
    throw DomainError("tableau_third_order: u = 2/3 makes the 2 - 3u denominator vanish");
  }
  Tableau t;
  t.s = 3;
  t.c = Eigen::VectorXd::Zero(3);
  t.c[1] = u;
  t.c[2] = v;
  t.W = Eigen::MatrixXd::Zero(3, 3);
  t.W(1, 0) = u;
  const double w32 = v * (v - u) / (u * (2.0 - 3.0 * u));
  t.W(2, 1) = w32;
  t.W(2, 0) = v - w32;
  t.b = Eigen::VectorXd::Zero(3);
  t.b[1] = (2.0 - 3.0 * v) / (6.0 * u * (u - v));
  t.b[2] = (2.0 - 3.0 * u) / (6.0 * v * (v - u));
  t.b[0] = 1.0 - t.b[1] - t.b[2];
  t.p = 3;
  return t;
}

OrderConditionReport check_order_conditions(const Tableau& tab, int p) {
  if (p < 1 || p > 3) throw DomainError("check_order_conditions: p must be 1, 2 or 3");
  OrderConditionReport rep;
  rep.order = p;
  auto add = [&rep](const std::string& name, double value, double target) {
    rep.conditions.push_back({name, value, target, std::abs(value - target)});
  };
  add("sum b_i", tab.b.sum(), 1.0);
  if (p >= 2) add("sum b_i c_i", tab.b.dot(tab.c), 0.5);
  if (p >= 3) {
    add("sum b_i c_i^2", tab.b.dot(tab.c.cwiseProduct(tab.c)), 1.0 / 3.0);
    add("sum b_i w_ij c_j", tab.b.dot(tab.W * tab.c), 1.0 / 6.0);
  }
  rep.pass = true;
  for (const auto& e : rep.conditions) rep.pass = rep.pass && e.residual <= 1e-12;
  return rep;
}

RkStepResult rk_step(const Tableau& tab, const Rhs& f, double t0, const Vec& x0, double h) {
  if (!(h > 0.0)) throw DomainError("rk_step: h must be positive");
  RkStepResult out;
  out.stage_derivs.reserve(static_cast<size_t>(tab.s));
  for (int i = 0; i < tab.s; ++i) {
    Vec xi = x0;
    for (int j = 0; j < i; ++j) {
      if (tab.W(i, j) != 0.0) xi += h * tab.W(i, j) * out.stage_derivs[static_cast<size_t>(j)];
    }
    Vec yi = f(xi, t0 + h * tab.c[i]);
    if (!yi.allFinite()) throw EvaluationError("rk_step: non-finite derivative evaluation", i);
    out.stage_derivs.push_back(std::move(yi));
  }
  out.x1 = x0;
  for (int i = 0; i < tab.s; ++i) out.x1 += h * tab.b[i] * out.stage_derivs[static_cast<size_t>(i)];
  return out;
}

std::vector<Vec> rk_chain(const Tableau& tab, const Rhs& f, double t0, const Vec& x0, double h,
                          int n) {
  if (n < 1) throw DomainError("rk_chain: need at least one step");
  std::vector<Vec> xs;
  xs.reserve(static_cast<size_t>(n) + 1);
  xs.push_back(x0);
  for (int k = 0; k < n; ++k) {
    xs.push_back(rk_step(tab, f, t0 + k * h, xs.back(), h).x1);
  }
  return xs;
}

}  // namespace gmrk
