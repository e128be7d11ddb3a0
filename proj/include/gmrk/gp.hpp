#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "gmrk/kernels.hpp"

namespace gmrk {

/// One scalar noise-free observation functional: the latent function or its
/// first derivative at time t (kernel coordinates).
struct Observation {
  double t = 0.0;
  bool is_derivative = false;

  static Observation value(double t) { return {t, false}; }
  static Observation derivative(double t) { return {t, true}; }
};

/// One value observation plus an ordered list of derivative observations.
/// The observation noise is fixed to zero.
struct ObservationSet {
  double t_value = 0.0;
  double x0 = 0.0;
  std::vector<double> deriv_times;
  std::vector<double> deriv_values;

  std::vector<Observation> functionals() const;
  Eigen::VectorXd data() const;
};

enum class SolveStrategy {
  Auto,        ///< local-state reparametrization for Wiener models, direct Gram otherwise
  DirectGram,  ///< joint Gram matrix, equilibrated pivoted LDLT (reference path)
  LocalState,  ///< exact decomposition around the earliest observation (Wiener only)
};

/// A Gaussian process conditioned on noise-free value/derivative
/// observations at fixed times. Data-independent: it exposes the linear
/// weight map from observation data to posterior means, plus unit-scale
/// posterior covariances, so one conditioner serves many data vectors
/// (one per output dimension).
///
/// With improper_limit = true the integrated-Wiener prior is replaced by
/// its infinite-offset limit: the polynomial trend components that are not
/// pinned by observations at the anchor become improper (flat), and the
/// posterior is the exact limit object. Posterior covariances then exist
/// only once enough observations identify every trend component.
class ConditionedGp {
 public:
  ConditionedGp(const KernelModel& model, std::vector<Observation> obs,
                SolveStrategy strategy = SolveStrategy::Auto, bool improper_limit = false);

  int size() const { return static_cast<int>(obs_.size()); }
  const std::vector<Observation>& observations() const { return obs_; }
  const KernelModel& model() const { return model_; }
  double condition_estimate() const { return condition_estimate_; }

  /// Row w such that the posterior mean of the query functional is w . data.
  Eigen::VectorXd mean_weights(const Observation& query) const;

  /// Posterior covariance between two query functionals (includes sigma2).
  double cov(const Observation& q1, const Observation& q2) const;

  /// True when posterior covariances are defined (always, except in the
  /// improper limit with too few observations).
  bool proper() const;

 private:
  friend class Posterior;

  struct LocalStateData;
  struct DirectGramData;

  Eigen::VectorXd weights_local(const Observation& query) const;
  Eigen::VectorXd weights_direct(const Observation& query) const;
  double cov_local(const Observation& q1, const Observation& q2) const;
  double cov_direct(const Observation& q1, const Observation& q2) const;
  const DirectGramData& direct() const;  // built lazily for left-of-anchor queries

  KernelModel model_;
  std::vector<Observation> obs_;
  bool use_local_ = false;
  bool improper_limit_ = false;
  double condition_estimate_ = 0.0;
  std::shared_ptr<LocalStateData> local_;
  mutable std::shared_ptr<DirectGramData> direct_;
};

/// Posterior over one scalar latent function: a conditioner plus its data.
class Posterior {
 public:
  Posterior(std::shared_ptr<const ConditionedGp> gp, Eigen::VectorXd data);

  double mean(double t) const;
  double deriv_mean(double t) const;
  double cov(double t, double t2) const;
  double var(double t) const;

  /// Weight row mapping the observation vector to the posterior mean at t.
  Eigen::VectorXd extrapolation_weights(double t, bool query_is_value = true) const;

  /// The representer coefficients K^-1 Y of the joint Gram system.
  const Eigen::VectorXd& weights() const;

  const Eigen::VectorXd& data() const { return data_; }
  const ConditionedGp& gp() const { return *gp_; }

 private:
  std::shared_ptr<const ConditionedGp> gp_;
  Eigen::VectorXd data_;
  mutable Eigen::VectorXd representer_;  // computed on first request
  mutable bool have_representer_ = false;
};

/// Posterior GP from one value observation and derivative observations.
Posterior posterior(const KernelModel& model, const ObservationSet& obs,
                    SolveStrategy strategy = SolveStrategy::Auto);

/// Row vector mapping (x0, y_1..y_s) to the posterior mean at t_query.
Eigen::VectorXd extrapolation_weights(const KernelModel& model, double t_query,
                                      const ObservationSet& obs, bool query_is_value = true,
                                      SolveStrategy strategy = SolveStrategy::Auto);

/// Independent per-dimension posteriors sharing one factorization.
/// All observation sets must share the same observation times.
std::vector<Posterior> multivariate_posterior(const KernelModel& model,
                                              const std::vector<ObservationSet>& per_dimension,
                                              SolveStrategy strategy = SolveStrategy::Auto);

}  // namespace gmrk
