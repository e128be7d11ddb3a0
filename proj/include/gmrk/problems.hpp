#pragma once

#include <string>
#include <vector>

#include "gmrk/butcher.hpp"

namespace gmrk {

/// Named scalar test problems with closed-form solutions:
///   linear:   x' = lambda x,     x(0) = 1    (default lambda = -1/2)
///   logistic: x' = x (1 - x),    x(0) = 1/2
///   cosmod:   x' = cos(t) x,     x(0) = 1
IVProblem make_builtin_problem(const std::string& name, double tH, double lambda = -0.5);

std::vector<std::string> builtin_problem_names();

/// Finite-difference consistency check of prob.exact against prob.f at 20
/// pseudo-random times (fixed seed); throws DomainError beyond 1e-9 relative.
void check_problem_consistency(const IVProblem& prob);

}  // namespace gmrk
