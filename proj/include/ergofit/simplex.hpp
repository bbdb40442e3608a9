#pragma once

#include <cstddef>
#include <vector>

namespace ergofit {

// Dense LP in standard form: minimize cost . x subject to rows . x = rhs,
// x >= 0. Desk-scale problems only (the coupling LPs cap at 10^4 variables).
struct LpProblem {
  std::size_t nvars = 0;
  std::vector<std::vector<double>> rows;  // each of size nvars
  std::vector<double> rhs;
  std::vector<double> cost;
};

struct LpSolution {
  enum class Status { Optimal, Infeasible, Unbounded };
  Status status = Status::Optimal;
  double value = 0.0;
  std::vector<double> x;
};

// Two-phase primal simplex with Bland's rule (anti-cycling, guaranteed
// termination). Redundant equality rows are detected in phase 1 and dropped.
LpSolution simplex_solve(const LpProblem& p);

}  // namespace ergofit
