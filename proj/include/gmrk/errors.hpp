#pragma once

#include <stdexcept>
#include <string>

namespace gmrk {

/// Invalid parameter or input outside the documented domain.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The right-hand side produced a non-finite value; carries the stage index.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& msg, int stage)
      : std::runtime_error(msg + " (stage " + std::to_string(stage) + ")"), stage_(stage) {}

  int stage() const { return stage_; }

 private:
  int stage_;
};

/// A linear system was too ill-conditioned (or singular) to solve reliably.
class ConditioningError : public std::runtime_error {
 public:
  ConditioningError(const std::string& msg, double condition_estimate)
      : std::runtime_error(msg + " (condition estimate " + std::to_string(condition_estimate) + ")"),
        condition_estimate_(condition_estimate) {}

  double condition_estimate() const { return condition_estimate_; }

 private:
  double condition_estimate_ = 0.0;
};

/// Numerical failure during filtering or propagation (divergence, NaN).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Internal failure to classify inputs into a documented piecewise branch.
class BranchSelectionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace gmrk
