#pragma once

#include <memory>
#include <vector>

#include "gmrk/solver.hpp"

namespace gmrk {

enum class ContinuationMode { NaiveChaining, Smoothing, Continuation };

/// Global solution object over [t0, tH] built from GMRK steps under one of
/// the three continuation policies.
///
/// NaiveChaining keeps the per-step posteriors but has no joint posterior;
/// its stddev() reports the step-local scale. Smoothing and Continuation
/// carry one joint posterior over all retained observations.
struct Trajectory {
  ContinuationMode mode = ContinuationMode::NaiveChaining;
  double t0 = 0.0;
  double h = 0.0;
  int n_steps = 0;
  bool has_joint_posterior = false;
  std::vector<StepResult> steps;

  Vec mean(double t) const;
  Vec stddev(double t) const;

  struct Row {
    double t = 0.0;
    Vec mean;
    Vec std;
    Vec truth;
    bool has_truth = false;
  };
  /// Uniform sampling with points_per_step samples in each step plus the
  /// final horizon point, sorted by t.
  std::vector<Row> grid_dump(const IVProblem& prob, int points_per_step) const;

  // Joint-posterior internals (Smoothing / Continuation).
  std::shared_ptr<const ConditionedGp> joint_gp;
  Eigen::MatrixXd joint_data;  // n_obs x dim
  Vec joint_sigma2;            // per dimension
  double time_shift = 0.0;     // kernel time = t - t0 + time_shift
};

/// Independent restarts: each step seeds the next with its posterior mean.
Trajectory run_naive(const GMRKConfig& cfg, const IVProblem& prob);

/// Naive chaining followed by one joint conditioning on every collected
/// observation (initial value, all gradients, later step-start values).
Trajectory run_smoothing(const GMRKConfig& cfg, const IVProblem& prob);

/// One full GMRK step, then gradient-only observations at the stage times of
/// the later intervals, each evaluated at the current joint posterior mean.
Trajectory run_continuation(const GMRKConfig& cfg, const IVProblem& prob);

}  // namespace gmrk
