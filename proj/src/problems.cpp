#include "gmrk/problems.hpp"

#include <cmath>
#include <random>

namespace gmrk {

IVProblem make_builtin_problem(const std::string& name, double tH, double lambda) {
  IVProblem p;
  if (name == "linear") {
    p = IVProblem::scalar([lambda](double x, double) { return lambda * x; }, 0.0, 1.0, tH,
                          [lambda](double t) { return std::exp(lambda * t); });
  } else if (name == "logistic") {
    p = IVProblem::scalar([](double x, double) { return x * (1.0 - x); }, 0.0, 0.5, tH,
                          [](double t) { return 1.0 / (1.0 + std::exp(-t)); });
  } else if (name == "cosmod") {
    p = IVProblem::scalar([](double x, double t) { return std::cos(t) * x; }, 0.0, 1.0, tH,
                          [](double t) { return std::exp(std::sin(t)); });
  } else {
    throw DomainError("unknown built-in problem: " + name);
  }
  p.validate();
  check_problem_consistency(p);
  return p;
}

std::vector<std::string> builtin_problem_names() { return {"linear", "logistic", "cosmod"}; }

void check_problem_consistency(const IVProblem& prob) {
  if (!prob.exact) return;
  std::mt19937 rng(20240917u);
  std::uniform_real_distribution<double> dist(prob.t0, prob.tH);
  const double d = 1e-5;
  for (int i = 0; i < 20; ++i) {
    const double t = dist(rng);
    const Vec xd = prob.f(prob.exact(t), t);
    const Vec fd = (prob.exact(t + d) - prob.exact(t - d)) / (2.0 * d);
    const double scale = std::max(1.0, xd.cwiseAbs().maxCoeff());
    if ((xd - fd).cwiseAbs().maxCoeff() > 1e-9 * scale) {
      throw DomainError("built-in problem: exact solution does not satisfy the ODE");
    }
  }
}

}  // namespace gmrk
