#pragma once

#include <memory>
#include <vector>

#include "gmrk/butcher.hpp"
#include "gmrk/gp.hpp"

namespace gmrk {

enum class TauMode { Limit, FiniteTau };

/// Configuration of one probabilistic Runge-Kutta step of order p in {1,2,3}.
/// Order p uses the p-times integrated Wiener prior; Limit mode evaluates the
/// infinite-offset posterior, FiniteTau anchors the process tau before t0.
struct GMRKConfig {
  int order = 2;
  double alpha = 0.5;  // order 2 stage fraction
  double u = 0.5;      // order 3 stage fractions
  double v = 1.0;
  TauMode mode = TauMode::Limit;
  double tau = 0.0;  // FiniteTau only, > 0
  double h = 1.0;

  void validate() const;
  int stages() const { return order; }
  Eigen::VectorXd stage_fractions() const;
  Tableau tableau() const;
};

/// Output of one GMRK step: the extrapolated mean, the evaluation schedule,
/// the extracted derivative weights, the calibrated output scale, and the
/// final-step posterior (mean and unit-scale covariance callables).
struct StepResult {
  double t0 = 0.0;
  double h = 0.0;
  Vec x1;
  struct Node {
    double c = 0.0;
    Vec xhat;
    Vec y;
  };
  std::vector<Node> nodes;
  Eigen::VectorXd weights_b;  // derivative-observation weights divided by h
  Vec sigma2_hat;             // per output dimension
  Vec variance_at_end;        // sigma2_hat * unit variance at t0 + h

  Vec mean(double t) const;
  double unit_cov(double t, double t2) const;
  Vec cov(double t, double t2) const;

  std::shared_ptr<const ConditionedGp> gp;  // unit-scale, over (x0, y_1..y_s)
  Eigen::MatrixXd obs_data;                 // (s+1) x N
  double time_shift = 0.0;                  // kernel time = t - t0 + time_shift
};

/// One probabilistic RK step from (t0, x0).
StepResult step(const GMRKConfig& cfg, const Rhs& f, double t0, const Vec& x0);

/// The node correction polynomial for the third stage; vanishes at v = 2/3.
double third_order_epsilon(double u, double v);

/// Places the third evaluation node from the posterior mean at t0 + h v and
/// the first two derivative observations, so that the node reproduces the
/// third-order tableau exactly in the limit.
double third_order_node(const GMRKConfig& cfg, double mean_at_hv, double y1, double y2);

/// Output-scale calibration: the squared (constant) s-th derivative of the
/// final-step limit posterior mean, from the s stage derivatives.
double calibrate_sigma2(const GMRKConfig& cfg, const Eigen::VectorXd& stage_derivs);

/// Limit posterior mean at offset s after observing x0 and y.size() stage
/// derivatives (valid for any real s). c2/c3 are the stage fractions.
double limit_posterior_mean(int p, double c2, double c3, double h, double x0,
                            const std::vector<double>& y, double s);

/// Limit posterior covariance after the full observation set of an order-p
/// step, evaluated from the piecewise closed forms (branch selected by
/// comparing the offsets against 0 and the stage offsets; ties take the
/// branch whose closed interval contains the point from the left).
double limit_posterior_cov(int p, double c2, double c3, double h, double s, double s2,
                           double sigma2 = 1.0);

}  // namespace gmrk
