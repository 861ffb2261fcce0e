#pragma once

#include <vector>

#include "psslab/model.hpp"

namespace psslab {

// Standard-form linear program:
//   minimize cost . x   subject to   eq x = rhs,  x >= 0.
struct StandardLp {
  Matrix eq;
  std::vector<double> rhs;
  std::vector<double> cost;

  int num_rows() const { return eq.rows; }
  int num_cols() const { return eq.cols; }
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> x;     // primal point, length num_cols
  std::vector<double> dual;  // equality-row multipliers, length num_rows
  double objective = 0.0;
  int degenerate_pivots = 0;  // zero-ratio pivots survived via Bland's rule
};

// Two-phase dense primal simplex with Bland's anti-cycling rule. The final
// basis is re-solved against the original data, so x and dual carry no
// accumulated tableau error.
LpSolution solve_lp(const StandardLp& lp);

}  // namespace psslab
