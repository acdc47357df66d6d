#pragma once

// Dense two-phase simplex for small standard-form problems
//
//   minimize c^T x  subject to  A x = b,  x >= 0.
//
// Bland's rule is used for both the entering and leaving variable, which
// rules out cycling on the degenerate vertices that the weight problem
// produces routinely.

#include "lbstab/common.hpp"

namespace lbstab {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  Vector x;
  double objective = 0.0;
  double phase_one_residual = 0.0;  ///< sum of artificials after phase one
  std::size_t iterations = 0;
};

struct SimplexOptions {
  double pivot_tol = 1e-11;
  double cost_tol = 1e-10;
  double feasibility_tol = 1e-9;  ///< relative to 1 + ||b||_1
  std::size_t max_iterations = 100000;
};

LpSolution solve_standard_form(const Matrix& a, const Vector& b, const Vector& c,
                               const SimplexOptions& options = {});

}  // namespace lbstab
