#include "gmrk/gp.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "gmrk/detail/integrator_matrices.hpp"
#include "gmrk/detail/wiener_forms.hpp"

namespace gmrk {

namespace {

constexpr double kConditionGate = 1e14;

// Unit-scale cross covariance between two observation functionals of the
// residual process started at 0 (deltas >= 0).
double z_cov(int q, const Observation& a, const Observation& b) {
  if (!a.is_derivative && !b.is_derivative) return detail::iw_k(q, a.t, b.t);
  if (!a.is_derivative && b.is_derivative) return detail::iw_kd(q, a.t, b.t);
  if (a.is_derivative && !b.is_derivative) return detail::iw_kd(q, b.t, a.t);
  return detail::iw_k(q - 1, a.t, b.t);
}

double equilibrated_condition(const Eigen::MatrixXd& K, Eigen::VectorXd* scale_out) {
  const Eigen::Index n = K.rows();
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double kii = K(i, i);
    if (!(kii > 0.0) || !std::isfinite(kii)) return std::numeric_limits<double>::infinity();
    d[i] = 1.0 / std::sqrt(kii);
  }
  if (scale_out) *scale_out = d;
  Eigen::MatrixXd Ks = d.asDiagonal() * K * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Ks, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace

std::vector<Observation> ObservationSet::functionals() const {
  std::vector<Observation> out;
  out.reserve(1 + deriv_times.size());
  out.push_back(Observation::value(t_value));
  for (double t : deriv_times) out.push_back(Observation::derivative(t));
  return out;
}

Eigen::VectorXd ObservationSet::data() const {
  Eigen::VectorXd y(1 + deriv_values.size());
  y[0] = x0;
  for (size_t i = 0; i < deriv_values.size(); ++i) y[static_cast<Eigen::Index>(i) + 1] = deriv_values[i];
  return y;
}

// ---------------------------------------------------------------------------
// Direct Gram engine

struct ConditionedGp::DirectGramData {
  KernelModel unit_model;
  Eigen::MatrixXd K;
  Eigen::MatrixXd K_eq;
  Eigen::VectorXd scale;
  Eigen::LDLT<Eigen::MatrixXd> ldlt;
  double cond = 0.0;

  Eigen::VectorXd cross(const std::vector<Observation>& obs, const Observation& query) const {
    Eigen::VectorXd r(static_cast<Eigen::Index>(obs.size()));
    for (size_t j = 0; j < obs.size(); ++j) {
      const Observation& o = obs[j];
      double val;
      if (!query.is_derivative && !o.is_derivative) {
        val = k(unit_model, query.t, o.t);
      } else if (!query.is_derivative && o.is_derivative) {
        val = kd(unit_model, query.t, o.t);
      } else if (query.is_derivative && !o.is_derivative) {
        val = dk(unit_model, query.t, o.t);
      } else {
        val = dkd(unit_model, query.t, o.t);
      }
      r[static_cast<Eigen::Index>(j)] = val;
    }
    return r;
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    const Eigen::VectorXd b = scale.asDiagonal() * rhs;
    Eigen::VectorXd y = ldlt.solve(b);
    y += ldlt.solve(b - K_eq * y);
    return scale.asDiagonal() * y;
  }
};

// ---------------------------------------------------------------------------
// Local-state engine
//
// Decompose the Wiener prior around the earliest observation time t_ref:
//   x(t_ref + d) = phi(d)' beta + Z(d),   d >= 0,
// with beta the state (x, x', ..., x^(q)) at t_ref and Z a fresh process
// started at 0. Observations at d = 0 pin state components exactly; the
// rest form a generalized least-squares system over the remaining state
// components with the correlated residual Z. All solves involve step-scale
// quantities only, so the path stays accurate for arbitrarily large
// anchors, where the joint Gram matrix is numerically unusable.

struct ConditionedGp::LocalStateData {
  int q = 1;
  bool limit = false;
  double t_ref = 0.0;
  std::vector<double> delta;      // per observation
  std::vector<int> pin_comp;      // pinned state components, ascending
  std::vector<int> pin_obs;       // observation index pinning each component
  std::vector<int> free_all;      // unpinned state components
  std::vector<int> free_used;     // components carried by the solve
  std::vector<int> rem_obs;       // observations entering the GLS block

  Eigen::MatrixXd b_pin;          // E[beta_F | beta_C] = b_pin * d_C (finite mode)
  Eigen::MatrixXd p_f;            // conditional prior covariance of beta_F
  Eigen::MatrixXd m;              // trend rows of remaining obs over free_used
  Eigen::VectorXd kz_scale;
  Eigen::MatrixXd kz_eq;          // equilibrated residual Gram, kept for refinement
  Eigen::LDLT<Eigen::MatrixXd> kz_ldlt;
  Eigen::MatrixXd sigma_gamma;    // posterior covariance of the free components
  Eigen::MatrixXd w_gamma;        // |free_used| x n : gamma_hat = w_gamma * Y
  Eigen::MatrixXd e_map;          // n_R x n : G (r - M gamma_hat) = e_map * Y

  Eigen::VectorXd g_solve(const Eigen::VectorXd& x) const {
    // One step of iterative refinement recovers the digits the joint solve
    // loses when observations span many steps.
    const Eigen::VectorXd b = kz_scale.asDiagonal() * x;
    Eigen::VectorXd y = kz_ldlt.solve(b);
    y += kz_ldlt.solve(b - kz_eq * y);
    return kz_scale.asDiagonal() * y;
  }

  // phi entry: d^c/c! for a value functional, d^(c-1)/(c-1)! for a derivative.
  static double trend(const Observation& o_local, int comp) {
    int e = o_local.is_derivative ? comp - 1 : comp;
    if (e < 0) return 0.0;
    return std::pow(o_local.t, e) / detail::factorial(e);
  }

  Observation local(const Observation& o) const { return {o.t - t_ref, o.is_derivative}; }
};

// ---------------------------------------------------------------------------

ConditionedGp::ConditionedGp(const KernelModel& model, std::vector<Observation> obs,
                             SolveStrategy strategy, bool improper_limit)
    : model_(model), obs_(std::move(obs)), improper_limit_(improper_limit) {
  if (obs_.empty()) throw DomainError("ConditionedGp: no observations");
  const bool wiener = model_.family == KernelFamily::IntegratedWiener;
  if (improper_limit_ && (!wiener || model_.q < 1)) {
    throw DomainError("ConditionedGp: improper limit requires an integrated Wiener model");
  }
  use_local_ = wiener && model_.q >= 1 &&
               (strategy == SolveStrategy::Auto || strategy == SolveStrategy::LocalState);
  if (strategy == SolveStrategy::LocalState && !use_local_) {
    throw DomainError("ConditionedGp: LocalState strategy requires an integrated Wiener model");
  }

  if (!use_local_) {
    direct();  // eager; also sets the condition estimate
    condition_estimate_ = direct_->cond;
    if (!(condition_estimate_ < kConditionGate)) {
      throw ConditioningError("ConditionedGp: Gram matrix numerically unusable",
                              condition_estimate_);
    }
    return;
  }

  auto d = std::make_shared<LocalStateData>();
  d->q = model_.q;
  d->limit = improper_limit_;
  d->t_ref = obs_[0].t;
  for (const auto& o : obs_) d->t_ref = std::min(d->t_ref, o.t);
  if (!improper_limit_ && !(d->t_ref > 0.0)) {
    throw DomainError("ConditionedGp: Wiener observations need positive shifted times");
  }

  const int n = static_cast<int>(obs_.size());
  d->delta.resize(obs_.size());
  bool have_pin[2] = {false, false};
  for (int i = 0; i < n; ++i) {
    const double delta = obs_[static_cast<size_t>(i)].t - d->t_ref;
    d->delta[static_cast<size_t>(i)] = delta;
    const int comp = obs_[static_cast<size_t>(i)].is_derivative ? 1 : 0;
    if (delta == 0.0 && !have_pin[comp] && comp <= d->q) {
      have_pin[comp] = true;
      d->pin_comp.push_back(comp);
      d->pin_obs.push_back(i);
    } else if (delta == 0.0) {
      throw ConditioningError("ConditionedGp: duplicate observation at the anchor time",
                              std::numeric_limits<double>::infinity());
    } else {
      d->rem_obs.push_back(i);
    }
  }
  std::sort(d->pin_comp.begin(), d->pin_comp.end());
  if (d->pin_comp.size() == 2 && d->pin_obs[0] > d->pin_obs[1]) std::swap(d->pin_obs[0], d->pin_obs[1]);

  for (int c = 0; c <= d->q; ++c) {
    if (std::find(d->pin_comp.begin(), d->pin_comp.end(), c) == d->pin_comp.end()) {
      d->free_all.push_back(c);
    }
  }
  const int n_r = static_cast<int>(d->rem_obs.size());
  const int n_f_all = static_cast<int>(d->free_all.size());
  const int n_used = improper_limit_ ? std::min(n_r, n_f_all) : n_f_all;
  d->free_used.assign(d->free_all.begin(), d->free_all.begin() + n_used);

  const int n_c = static_cast<int>(d->pin_comp.size());
  if (!improper_limit_) {
    // Conditional prior of the free components given the pinned ones, in the
    // scale-free representation P0 = D Qc D with D_i = t_ref^(q + 1/2 - i).
    Eigen::MatrixXd qc = detail::process_noise_coeffs(d->q);
    Eigen::VectorXd dscale(d->q + 1);
    for (int i = 0; i <= d->q; ++i) dscale[i] = std::pow(d->t_ref, d->q + 0.5 - i);
    Eigen::MatrixXd qcc(n_c, n_c), qfc(n_f_all, n_c), qff(n_f_all, n_f_all);
    for (int i = 0; i < n_c; ++i)
      for (int j = 0; j < n_c; ++j) qcc(i, j) = qc(d->pin_comp[i], d->pin_comp[j]);
    for (int i = 0; i < n_f_all; ++i)
      for (int j = 0; j < n_c; ++j) qfc(i, j) = qc(d->free_all[i], d->pin_comp[j]);
    for (int i = 0; i < n_f_all; ++i)
      for (int j = 0; j < n_f_all; ++j) qff(i, j) = qc(d->free_all[i], d->free_all[j]);
    Eigen::MatrixXd qcc_inv_qcf =
        n_c > 0 ? Eigen::MatrixXd(qcc.ldlt().solve(qfc.transpose())) : Eigen::MatrixXd(0, n_f_all);
    Eigen::MatrixXd schur = qff - (n_c > 0 ? Eigen::MatrixXd(qfc * qcc_inv_qcf) : Eigen::MatrixXd::Zero(n_f_all, n_f_all));
    d->b_pin.resize(n_f_all, n_c);
    d->p_f.resize(n_f_all, n_f_all);
    for (int i = 0; i < n_f_all; ++i) {
      for (int j = 0; j < n_c; ++j) {
        d->b_pin(i, j) = qcc_inv_qcf(j, i) * dscale[d->free_all[i]] / dscale[d->pin_comp[j]];
      }
      for (int j = 0; j < n_f_all; ++j) {
        d->p_f(i, j) = schur(i, j) * dscale[d->free_all[i]] * dscale[d->free_all[j]];
      }
    }
  } else {
    d->b_pin = Eigen::MatrixXd::Zero(n_used, n_c);
    d->p_f = Eigen::MatrixXd::Zero(n_used, n_used);
  }

  // GLS block over the remaining observations.
  const int n_f = static_cast<int>(d->free_used.size());
  d->m.resize(n_r, n_f);
  Eigen::MatrixXd kz(n_r, n_r);
  for (int j = 0; j < n_r; ++j) {
    Observation oj = d->local(obs_[static_cast<size_t>(d->rem_obs[static_cast<size_t>(j)])]);
    for (int f = 0; f < n_f; ++f) d->m(j, f) = LocalStateData::trend(oj, d->free_used[static_cast<size_t>(f)]);
    for (int l = 0; l <= j; ++l) {
      Observation ol = d->local(obs_[static_cast<size_t>(d->rem_obs[static_cast<size_t>(l)])]);
      kz(j, l) = kz(l, j) = z_cov(d->q, oj, ol);
    }
  }

  double cond_kz = 1.0;
  if (n_r > 0) {
    cond_kz = equilibrated_condition(kz, &d->kz_scale);
    if (!(cond_kz < kConditionGate)) {
      throw ConditioningError("ConditionedGp: residual Gram matrix numerically unusable", cond_kz);
    }
    d->kz_eq = d->kz_scale.asDiagonal() * kz * d->kz_scale.asDiagonal();
    d->kz_ldlt.compute(d->kz_eq);
  }

  // Posterior over the free components: precision = P_f^-1 + M' G M.
  double cond_lambda = 1.0;
  Eigen::MatrixXd gm(n_r, n_f);
  if (n_f > 0) {
    for (int f = 0; f < n_f; ++f) gm.col(f) = n_r > 0 ? d->g_solve(d->m.col(f)) : Eigen::VectorXd(0);
    Eigen::MatrixXd lambda = d->m.transpose() * gm;
    if (!improper_limit_) {
      // b_pin/p_f are over free_all == free_used in finite mode
      lambda += d->p_f.inverse();
    }
    cond_lambda = equilibrated_condition(lambda, nullptr);
    if (!(cond_lambda < kConditionGate)) {
      throw ConditioningError("ConditionedGp: trend normal equations numerically unusable",
                              cond_lambda);
    }
    d->sigma_gamma = lambda.inverse();
  } else {
    d->sigma_gamma.resize(0, 0);
  }

  // Linear maps from the data vector.
  Eigen::MatrixXd resid_map = Eigen::MatrixXd::Zero(n_r, n);
  for (int j = 0; j < n_r; ++j) {
    const int oj = d->rem_obs[static_cast<size_t>(j)];
    resid_map(j, oj) = 1.0;
    Observation olocal = d->local(obs_[static_cast<size_t>(oj)]);
    for (int c = 0; c < n_c; ++c) {
      double coeff = LocalStateData::trend(olocal, d->pin_comp[static_cast<size_t>(c)]);
      for (int f = 0; f < n_f; ++f) {
        coeff += LocalStateData::trend(olocal, d->free_used[static_cast<size_t>(f)]) * d->b_pin(f, c);
      }
      resid_map(j, d->pin_obs[static_cast<size_t>(c)]) -= coeff;
    }
  }
  if (n_f > 0) {
    d->w_gamma = d->sigma_gamma * gm.transpose() * resid_map;
  } else {
    d->w_gamma = Eigen::MatrixXd::Zero(0, n);
  }
  if (n_r > 0) {
    Eigen::MatrixXd inner = resid_map - (n_f > 0 ? Eigen::MatrixXd(d->m * d->w_gamma)
                                                 : Eigen::MatrixXd::Zero(n_r, n));
    d->e_map.resize(n_r, n);
    for (int col = 0; col < n; ++col) d->e_map.col(col) = d->g_solve(inner.col(col));
  } else {
    d->e_map = Eigen::MatrixXd::Zero(0, n);
  }

  local_ = std::move(d);
  condition_estimate_ = std::max(cond_kz, cond_lambda);
}

bool ConditionedGp::proper() const {
  if (!use_local_ || !improper_limit_) return true;
  return local_->free_used.size() == local_->free_all.size();
}

Eigen::VectorXd ConditionedGp::mean_weights(const Observation& query) const {
  if (use_local_) {
    if (query.t >= local_->t_ref) return weights_local(query);
    if (improper_limit_) {
      throw DomainError("ConditionedGp: improper-limit queries before the anchor are undefined");
    }
    // Queries left of the anchor fall back to the joint Gram path.
    return weights_direct(query);
  }
  return weights_direct(query);
}

double ConditionedGp::cov(const Observation& q1, const Observation& q2) const {
  if (use_local_) {
    if (q1.t >= local_->t_ref && q2.t >= local_->t_ref) return cov_local(q1, q2);
    if (improper_limit_) {
      throw DomainError("ConditionedGp: improper-limit queries before the anchor are undefined");
    }
    return cov_direct(q1, q2);
  }
  return cov_direct(q1, q2);
}

Eigen::VectorXd ConditionedGp::weights_local(const Observation& query) const {
  const LocalStateData& d = *local_;
  const int n = size();
  const int n_c = static_cast<int>(d.pin_comp.size());
  const int n_f = static_cast<int>(d.free_used.size());
  const int n_r = static_cast<int>(d.rem_obs.size());
  Observation ql = d.local(query);

  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd tf(n_f);
  for (int f = 0; f < n_f; ++f) tf[f] = LocalStateData::trend(ql, d.free_used[static_cast<size_t>(f)]);
  for (int c = 0; c < n_c; ++c) {
    double coeff = LocalStateData::trend(ql, d.pin_comp[static_cast<size_t>(c)]);
    for (int f = 0; f < n_f; ++f) coeff += tf[f] * d.b_pin(f, c);
    w[d.pin_obs[static_cast<size_t>(c)]] += coeff;
  }
  if (n_f > 0) w += d.w_gamma.transpose() * tf;
  if (n_r > 0) {
    Eigen::VectorXd ell(n_r);
    for (int j = 0; j < n_r; ++j) {
      ell[j] = z_cov(d.q, ql, d.local(obs_[static_cast<size_t>(d.rem_obs[static_cast<size_t>(j)])]));
    }
    w += d.e_map.transpose() * ell;
  }
  return w;
}

double ConditionedGp::cov_local(const Observation& q1, const Observation& q2) const {
  const LocalStateData& d = *local_;
  if (!proper()) {
    throw DomainError(
        "ConditionedGp: improper-limit posterior covariance needs all trend components observed");
  }
  const int n_f = static_cast<int>(d.free_used.size());
  const int n_r = static_cast<int>(d.rem_obs.size());
  Observation a = d.local(q1), b = d.local(q2);
  double out = z_cov(d.q, a, b);

  Eigen::VectorXd ta(n_f), tb(n_f);
  for (int f = 0; f < n_f; ++f) {
    ta[f] = LocalStateData::trend(a, d.free_used[static_cast<size_t>(f)]);
    tb[f] = LocalStateData::trend(b, d.free_used[static_cast<size_t>(f)]);
  }
  if (n_r > 0) {
    Eigen::VectorXd la(n_r), lb(n_r);
    for (int j = 0; j < n_r; ++j) {
      Observation oj = d.local(obs_[static_cast<size_t>(d.rem_obs[static_cast<size_t>(j)])]);
      la[j] = z_cov(d.q, a, oj);
      lb[j] = z_cov(d.q, b, oj);
    }
    Eigen::VectorXd glb = d.g_solve(lb);
    out -= la.dot(glb);
    if (n_f > 0) {
      Eigen::VectorXd ua = ta - d.m.transpose() * d.g_solve(la);
      Eigen::VectorXd ub = tb - d.m.transpose() * glb;
      out += ua.dot(d.sigma_gamma * ub);
    }
  } else if (n_f > 0) {
    // No residual observations: the free components keep their prior.
    out += ta.dot(d.p_f * tb);
  }
  return model_.sigma2 * out;
}

const ConditionedGp::DirectGramData& ConditionedGp::direct() const {
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  if (direct_) return *direct_;
  auto dg = std::make_shared<DirectGramData>();
  dg->unit_model = model_;
  dg->unit_model.sigma2 = 1.0;
  const int n = size();
  dg->K.resize(n, n);
  for (int j = 0; j < n; ++j) {
    dg->K.col(j) = dg->cross(obs_, obs_[static_cast<size_t>(j)]);
  }
  dg->cond = equilibrated_condition(dg->K, &dg->scale);
  if (!(dg->cond < kConditionGate)) {
    throw ConditioningError("ConditionedGp: Gram matrix numerically unusable", dg->cond);
  }
  dg->K_eq = dg->scale.asDiagonal() * dg->K * dg->scale.asDiagonal();
  dg->ldlt.compute(dg->K_eq);
  direct_ = std::move(dg);
  return *direct_;
}

Eigen::VectorXd ConditionedGp::weights_direct(const Observation& query) const {
  const DirectGramData& dg = direct();
  return dg.solve(dg.cross(obs_, query));
}

double ConditionedGp::cov_direct(const Observation& q1, const Observation& q2) const {
  const DirectGramData& dg = direct();
  Eigen::VectorXd r1 = dg.cross(obs_, q1);
  Eigen::VectorXd r2 = dg.cross(obs_, q2);
  double base;
  if (!q1.is_derivative && !q2.is_derivative) {
    base = k(dg.unit_model, q1.t, q2.t);
  } else if (!q1.is_derivative && q2.is_derivative) {
    base = kd(dg.unit_model, q1.t, q2.t);
  } else if (q1.is_derivative && !q2.is_derivative) {
    base = dk(dg.unit_model, q1.t, q2.t);
  } else {
    base = dkd(dg.unit_model, q1.t, q2.t);
  }
  return model_.sigma2 * (base - r1.dot(dg.solve(r2)));
}

// ---------------------------------------------------------------------------

Posterior::Posterior(std::shared_ptr<const ConditionedGp> gp, Eigen::VectorXd data)
    : gp_(std::move(gp)), data_(std::move(data)) {
  if (data_.size() != gp_->size()) throw DomainError("Posterior: data size mismatch");
}

double Posterior::mean(double t) const {
  return gp_->mean_weights(Observation::value(t)).dot(data_);
}

double Posterior::deriv_mean(double t) const {
  return gp_->mean_weights(Observation::derivative(t)).dot(data_);
}

double Posterior::cov(double t, double t2) const {
  return gp_->cov(Observation::value(t), Observation::value(t2));
}

double Posterior::var(double t) const { return cov(t, t); }

Eigen::VectorXd Posterior::extrapolation_weights(double t, bool query_is_value) const {
  return gp_->mean_weights({t, !query_is_value});
}

const Eigen::VectorXd& Posterior::weights() const {
  if (!have_representer_) {
    // Representer coefficients of the joint Gram system, K^-1 Y.
    const auto& dg = gp_->direct();
    representer_ = dg.solve(data_);
    have_representer_ = true;
  }
  return representer_;
}

Posterior posterior(const KernelModel& model, const ObservationSet& obs, SolveStrategy strategy) {
  if (obs.deriv_times.size() != obs.deriv_values.size()) {
    throw DomainError("posterior: derivative times/values length mismatch");
  }
  auto gp = std::make_shared<const ConditionedGp>(model, obs.functionals(), strategy);
  return Posterior(gp, obs.data());
}

Eigen::VectorXd extrapolation_weights(const KernelModel& model, double t_query,
                                      const ObservationSet& obs, bool query_is_value,
                                      SolveStrategy strategy) {
  ConditionedGp gp(model, obs.functionals(), strategy);
  return gp.mean_weights({t_query, !query_is_value});
}

std::vector<Posterior> multivariate_posterior(const KernelModel& model,
                                              const std::vector<ObservationSet>& per_dimension,
                                              SolveStrategy strategy) {
  if (per_dimension.empty()) throw DomainError("multivariate_posterior: no dimensions");
  const ObservationSet& first = per_dimension.front();
  for (const auto& o : per_dimension) {
    if (o.t_value != first.t_value || o.deriv_times != first.deriv_times) {
      throw DomainError("multivariate_posterior: dimensions must share observation times");
    }
  }
  auto gp = std::make_shared<const ConditionedGp>(model, first.functionals(), strategy);
  std::vector<Posterior> out;
  out.reserve(per_dimension.size());
  for (const auto& o : per_dimension) out.emplace_back(gp, o.data());
  return out;
}

}  // namespace gmrk
