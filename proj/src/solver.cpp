#include "gmrk/solver.hpp"

#include <cmath>

#include "gmrk/detail/integrator_matrices.hpp"

namespace gmrk {

namespace {

// Kernel-coordinate anchor for Limit mode; only offsets from it matter.
constexpr double kLimitAnchor = 1.0;

Eigen::VectorXd divided_difference_coeffs(const std::vector<double>& xs) {
  // Coefficients of the highest-order divided difference over xs.
  const int n = static_cast<int>(xs.size());
  Eigen::VectorXd c(n);
  for (int i = 0; i < n; ++i) {
    double denom = 1.0;
    for (int j = 0; j < n; ++j) {
      if (j != i) denom *= xs[static_cast<size_t>(i)] - xs[static_cast<size_t>(j)];
    }
    c[i] = 1.0 / denom;
  }
  return c;
}

}  // namespace

void GMRKConfig::validate() const {
  if (order < 1 || order > 3) throw DomainError("GMRKConfig: order must be 1, 2 or 3");
  if (!(h > 0.0)) throw DomainError("GMRKConfig: h must be positive");
  if (order == 2 && !(alpha > 0.0 && alpha <= 1.0)) {
    throw DomainError("GMRKConfig: alpha must lie in (0, 1]");
  }
  if (order == 3) {
    tableau();  // shares the singular-parameter guards
  }
  if (mode == TauMode::FiniteTau && !(tau > 0.0)) {
    throw DomainError("GMRKConfig: FiniteTau mode needs tau > 0");
  }
}

Eigen::VectorXd GMRKConfig::stage_fractions() const {
  Eigen::VectorXd c(order);
  c[0] = 0.0;
  if (order == 2) c[1] = alpha;
  if (order == 3) {
    c[1] = u;
    c[2] = v;
  }
  return c;
}

Tableau GMRKConfig::tableau() const {
  switch (order) {
    case 1:
      return tableau_euler();
    case 2:
      return tableau_second_order(alpha);
    default:
      return tableau_third_order(u, v);
  }
}

double third_order_epsilon(double u, double v) {
  if (std::abs(3.0 * u - 2.0) < 1e-12) {
    throw DomainError("third_order_epsilon: u = 2/3 makes the 3u - 2 denominator vanish");
  }
  return v / 2.0 * (3.0 * v - 2.0) / (3.0 * u - 2.0);
}

double third_order_node(const GMRKConfig& cfg, double mean_at_hv, double y1, double y2) {
  if (cfg.order != 3) throw DomainError("third_order_node: only defined for order 3");
  // The posterior mean at t0 + h v carries an extra eps(v) (y2 - y1) term on
  // top of the tableau node, so the node is the mean minus that correction.
  return mean_at_hv - cfg.h * third_order_epsilon(cfg.u, cfg.v) * (y2 - y1);
}

double calibrate_sigma2(const GMRKConfig& cfg, const Eigen::VectorXd& y) {
  if (y.size() != cfg.order) throw DomainError("calibrate_sigma2: need one derivative per stage");
  double d = 0.0;
  switch (cfg.order) {
    case 1:
      d = y[0];
      break;
    case 2:
      d = (y[1] - y[0]) / (cfg.h * cfg.alpha);
      break;
    default: {
      const double uu = cfg.u, vv = cfg.v;
      d = 2.0 / (cfg.h * cfg.h) *
          (y[0] / (uu * vv) + y[1] / (uu * (uu - vv)) - y[2] / (vv * (uu - vv)));
      break;
    }
  }
  return d * d;
}

Vec StepResult::mean(double t) const {
  const double ts = t - t0 + time_shift;
  Eigen::VectorXd w = gp->mean_weights(Observation::value(ts));
  return (w.transpose() * obs_data).transpose();
}

double StepResult::unit_cov(double t, double t2) const {
  const double a = t - t0 + time_shift;
  const double b = t2 - t0 + time_shift;
  return gp->cov(Observation::value(a), Observation::value(b));
}

Vec StepResult::cov(double t, double t2) const { return sigma2_hat * unit_cov(t, t2); }

StepResult step(const GMRKConfig& cfg, const Rhs& f, double t0, const Vec& x0) {
  cfg.validate();
  const bool limit = cfg.mode == TauMode::Limit;
  const double shift = limit ? kLimitAnchor : cfg.tau;
  const int p = cfg.order;
  const Eigen::VectorXd c = cfg.stage_fractions();
  const Eigen::Index dim = x0.size();
  const KernelModel model = KernelModel::integrated_wiener(p, 1.0, limit ? 0.0 : cfg.tau);

  StepResult out;
  out.t0 = t0;
  out.h = cfg.h;
  out.time_shift = shift;
  out.nodes.reserve(static_cast<size_t>(p));

  std::vector<Observation> obs;
  obs.push_back(Observation::value(shift));
  Eigen::MatrixXd data(p + 1, dim);
  data.row(0) = x0.transpose();

  auto eval_stage = [&](const Vec& xhat, int i) {
    Vec y = f(xhat, t0 + cfg.h * c[i]);
    if (!y.allFinite()) throw EvaluationError("step: non-finite derivative evaluation", i + 1);
    out.nodes.push_back({c[i], xhat, y});
    obs.push_back(Observation::derivative(shift + cfg.h * c[i]));
    data.row(1 + i) = y.transpose();
  };

  // First node sits at the posterior mean given the value observation, which
  // is x0 itself in both modes.
  eval_stage(x0, 0);

  std::shared_ptr<const ConditionedGp> gp;
  auto mean_at = [&](double t_abs, int n_obs) {
    Eigen::VectorXd w = gp->mean_weights(Observation::value(t_abs - t0 + shift));
    return Vec((w.transpose() * data.topRows(n_obs)).transpose());
  };

  if (p >= 2) {
    gp = std::make_shared<const ConditionedGp>(model, obs, SolveStrategy::Auto, limit);
    Vec xhat2 = mean_at(t0 + cfg.h * c[1], 2);
    eval_stage(xhat2, 1);
  }
  if (p == 3) {
    gp = std::make_shared<const ConditionedGp>(model, obs, SolveStrategy::Auto, limit);
    Vec mu = mean_at(t0 + cfg.h * c[2], 3);
    const double eps = third_order_epsilon(cfg.u, cfg.v);
    Vec xhat3 = mu - cfg.h * eps * (out.nodes[1].y - out.nodes[0].y);
    eval_stage(xhat3, 2);
  }

  gp = std::make_shared<const ConditionedGp>(model, obs, SolveStrategy::Auto, limit);
  out.gp = gp;
  out.obs_data = data;

  Eigen::VectorXd w_end = gp->mean_weights(Observation::value(shift + cfg.h));
  out.x1 = (w_end.transpose() * data).transpose();
  out.weights_b = w_end.tail(p) / cfg.h;

  out.sigma2_hat = Vec(dim);
  if (limit) {
    for (Eigen::Index d = 0; d < dim; ++d) {
      out.sigma2_hat[d] = calibrate_sigma2(cfg, data.col(d).tail(p));
    }
  } else {
    // s-th divided difference of the posterior mean over the step interval.
    std::vector<double> xs(static_cast<size_t>(p) + 1);
    for (int i = 0; i <= p; ++i) xs[static_cast<size_t>(i)] = cfg.h * i / p;
    Eigen::VectorXd coeff = divided_difference_coeffs(xs);
    Eigen::MatrixXd vals(p + 1, dim);
    for (int i = 0; i <= p; ++i) {
      Eigen::VectorXd w = gp->mean_weights(Observation::value(shift + xs[static_cast<size_t>(i)]));
      vals.row(i) = (w.transpose() * data);
    }
    const double sfact = detail::factorial(p);
    for (Eigen::Index d = 0; d < dim; ++d) {
      const double der = sfact * coeff.dot(vals.col(d));
      out.sigma2_hat[d] = der * der;
    }
  }

  const double unit_end = out.unit_cov(t0 + cfg.h, t0 + cfg.h);
  out.variance_at_end = out.sigma2_hat * unit_end;
  return out;
}

}  // namespace gmrk
