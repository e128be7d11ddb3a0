#include "gmrk/continuation.hpp"

#include <algorithm>
#include <cmath>

namespace gmrk {

namespace {

constexpr double kLimitAnchor = 1.0;

int step_count(const GMRKConfig& cfg, const IVProblem& prob) {
  const double span = prob.tH - prob.t0;
  const double ratio = span / cfg.h;
  const int n = static_cast<int>(std::lround(ratio));
  if (n < 1 || std::abs(ratio - n) > 1e-9) {
    throw DomainError("continuation: (tH - t0) must be a positive integer multiple of h");
  }
  return n;
}

struct JointBuilder {
  const GMRKConfig& cfg;
  double t0;
  double shift;
  bool limit;
  KernelModel model;
  std::vector<Observation> obs;
  std::vector<Eigen::RowVectorXd> data_rows;
  std::shared_ptr<const ConditionedGp> gp;

  JointBuilder(const GMRKConfig& c, double t0_)
      : cfg(c),
        t0(t0_),
        shift(c.mode == TauMode::Limit ? kLimitAnchor : c.tau),
        limit(c.mode == TauMode::Limit),
        model(KernelModel::integrated_wiener(c.order, 1.0, limit ? 0.0 : c.tau)) {}

  double kernel_time(double t_abs) const { return t_abs - t0 + shift; }

  void add(const Observation& o, const Vec& value) {
    obs.push_back(o);
    data_rows.push_back(value.transpose());
    gp.reset();
  }

  void add_value(double t_abs, const Vec& value) {
    add(Observation::value(kernel_time(t_abs)), value);
  }

  void add_derivative(double t_abs, const Vec& value) {
    add(Observation::derivative(kernel_time(t_abs)), value);
  }

  bool has_derivative_at(double t_abs) const {
    const double tk = kernel_time(t_abs);
    for (const auto& o : obs) {
      if (o.is_derivative && std::abs(o.t - tk) <= 1e-12 * cfg.h) return true;
    }
    return false;
  }

  Vec derivative_value_at(double t_abs) const {
    const double tk = kernel_time(t_abs);
    for (size_t i = 0; i < obs.size(); ++i) {
      if (obs[i].is_derivative && std::abs(obs[i].t - tk) <= 1e-12 * cfg.h) {
        return data_rows[i].transpose();
      }
    }
    throw DomainError("continuation: no derivative observation at the requested time");
  }

  void ensure_gp() {
    if (!gp) gp = std::make_shared<const ConditionedGp>(model, obs, SolveStrategy::Auto, limit);
  }

  Eigen::MatrixXd data_matrix() const {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(data_rows.size()), data_rows.front().size());
    for (size_t i = 0; i < data_rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = data_rows[i];
    return m;
  }

  Vec mean(double t_abs) {
    ensure_gp();
    Eigen::VectorXd w = gp->mean_weights(Observation::value(kernel_time(t_abs)));
    return (w.transpose() * data_matrix()).transpose();
  }
};

Trajectory make_base(const GMRKConfig& cfg, const IVProblem& prob, ContinuationMode mode, int n) {
  Trajectory tr;
  tr.mode = mode;
  tr.t0 = prob.t0;
  tr.h = cfg.h;
  tr.n_steps = n;
  tr.steps.reserve(static_cast<size_t>(n));
  return tr;
}

void run_chain(const GMRKConfig& cfg, const IVProblem& prob, int n, Trajectory& tr) {
  Vec x = prob.x0;
  for (int k = 0; k < n; ++k) {
    const double tk = prob.t0 + k * cfg.h;
    try {
      tr.steps.push_back(step(cfg, prob.f, tk, x));
    } catch (const EvaluationError& e) {
      throw EvaluationError(std::string("chained step ") + std::to_string(k + 1) + ": " + e.what(),
                            e.stage());
    }
    x = tr.steps.back().x1;
  }
}

}  // namespace

Vec Trajectory::mean(double t) const {
  if (has_joint_posterior) {
    Eigen::VectorXd w = joint_gp->mean_weights(Observation::value(t - t0 + time_shift));
    return (w.transpose() * joint_data).transpose();
  }
  int idx = std::clamp(static_cast<int>(std::floor((t - t0) / h + 1e-12)), 0, n_steps - 1);
  return steps[static_cast<size_t>(idx)].mean(t);
}

Vec Trajectory::stddev(double t) const {
  if (has_joint_posterior) {
    const double tk = t - t0 + time_shift;
    const double unit = joint_gp->cov(Observation::value(tk), Observation::value(tk));
    return (joint_sigma2 * std::max(unit, 0.0)).cwiseSqrt();
  }
  int idx = std::clamp(static_cast<int>(std::floor((t - t0) / h + 1e-12)), 0, n_steps - 1);
  const StepResult& st = steps[static_cast<size_t>(idx)];
  const double unit = std::max(st.unit_cov(t, t), 0.0);
  return (st.sigma2_hat * unit).cwiseSqrt();
}

std::vector<Trajectory::Row> Trajectory::grid_dump(const IVProblem& prob,
                                                   int points_per_step) const {
  if (points_per_step < 1) throw DomainError("grid_dump: need at least one point per step");
  std::vector<Row> rows;
  rows.reserve(static_cast<size_t>(n_steps) * static_cast<size_t>(points_per_step) + 1);
  for (int k = 0; k < n_steps; ++k) {
    for (int j = 0; j < points_per_step; ++j) {
      const double t = t0 + h * (k + static_cast<double>(j) / points_per_step);
      rows.push_back({t, mean(t), stddev(t), Vec(), false});
    }
  }
  const double tH = t0 + h * n_steps;
  rows.push_back({tH, mean(tH), stddev(tH), Vec(), false});
  if (prob.exact) {
    for (auto& r : rows) {
      r.truth = prob.exact(r.t);
      r.has_truth = true;
    }
  }
  return rows;
}

Trajectory run_naive(const GMRKConfig& cfg, const IVProblem& prob) {
  cfg.validate();
  prob.validate();
  const int n = step_count(cfg, prob);
  Trajectory tr = make_base(cfg, prob, ContinuationMode::NaiveChaining, n);
  run_chain(cfg, prob, n, tr);
  return tr;
}

Trajectory run_smoothing(const GMRKConfig& cfg, const IVProblem& prob) {
  cfg.validate();
  prob.validate();
  const int n = step_count(cfg, prob);
  Trajectory tr = make_base(cfg, prob, ContinuationMode::Smoothing, n);
  run_chain(cfg, prob, n, tr);

  // Joint conditioning on everything the chain produced: the initial value,
  // all stage gradients, and the later step-start values.
  JointBuilder jb(cfg, prob.t0);
  jb.add_value(prob.t0, prob.x0);
  const Eigen::VectorXd c = cfg.stage_fractions();
  for (int k = 0; k < n; ++k) {
    const StepResult& st = tr.steps[static_cast<size_t>(k)];
    if (k > 0) jb.add_value(prob.t0 + k * cfg.h, tr.steps[static_cast<size_t>(k - 1)].x1);
    for (int i = 0; i < cfg.order; ++i) {
      jb.add_derivative(prob.t0 + cfg.h * (k + c[i]), st.nodes[static_cast<size_t>(i)].y);
    }
  }
  jb.ensure_gp();
  tr.has_joint_posterior = true;
  tr.joint_gp = jb.gp;
  tr.joint_data = jb.data_matrix();
  tr.joint_sigma2 = tr.steps.front().sigma2_hat;
  tr.time_shift = jb.shift;
  return tr;
}

Trajectory run_continuation(const GMRKConfig& cfg, const IVProblem& prob) {
  cfg.validate();
  prob.validate();
  const int n = step_count(cfg, prob);
  Trajectory tr = make_base(cfg, prob, ContinuationMode::Continuation, n);

  StepResult first = step(cfg, prob.f, prob.t0, prob.x0);
  tr.steps.push_back(first);

  JointBuilder jb(cfg, prob.t0);
  jb.add_value(prob.t0, prob.x0);
  const Eigen::VectorXd c = cfg.stage_fractions();
  for (int i = 0; i < cfg.order; ++i) {
    jb.add_derivative(prob.t0 + cfg.h * c[i], first.nodes[static_cast<size_t>(i)].y);
  }

  Vec sigma2 = first.sigma2_hat;
  for (int k = 1; k < n; ++k) {
    // Gradient-only continuation: evaluate f at the current joint mean at
    // each stage time, skipping times that are already observed.
    Eigen::MatrixXd batch(cfg.order, prob.x0.size());
    for (int i = 0; i < cfg.order; ++i) {
      const double ts = prob.t0 + cfg.h * (k + c[i]);
      if (!jb.has_derivative_at(ts)) {
        Vec xhat = jb.mean(ts);
        Vec y = prob.f(xhat, ts);
        if (!y.allFinite()) {
          throw EvaluationError("continuation: non-finite derivative evaluation", i + 1);
        }
        jb.add_derivative(ts, y);
      }
      batch.row(i) = jb.derivative_value_at(ts).transpose();
    }
    // Re-estimate the output scale from this batch; keep the running maximum
    // so the variance scale cannot shrink as data accumulates.
    for (Eigen::Index d = 0; d < prob.x0.size(); ++d) {
      sigma2[d] = std::max(sigma2[d], calibrate_sigma2(cfg, batch.col(d)));
    }
  }
  jb.ensure_gp();
  tr.has_joint_posterior = true;
  tr.joint_gp = jb.gp;
  tr.joint_data = jb.data_matrix();
  tr.joint_sigma2 = sigma2;
  tr.time_shift = jb.shift;
  return tr;
}

}  // namespace gmrk
