#pragma once

#include <optional>
#include <vector>

namespace fot::detail {

/// Linear feasibility problem over x >= 0:
///   eq[i] . x == eq_rhs[i],   le[j] . x <= le_rhs[j].
struct FeasibilityProblem {
  std::size_t num_vars = 0;
  std::vector<std::vector<double>> eq;
  std::vector<double> eq_rhs;
  std::vector<std::vector<double>> le;
  std::vector<double> le_rhs;
};

/// Phase-I simplex with Bland's rule. Returns a feasible point, or nullopt
/// when the optimal phase-I objective exceeds `tol`.
std::optional<std::vector<double>> find_feasible_point(
    const FeasibilityProblem& lp, double tol = 1e-10);

}  // namespace fot::detail
