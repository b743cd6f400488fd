#pragma once

#include "omit/types.hpp"

namespace omit {

// Dense LP in the form
//   maximize  objective . x
//   s.t.      eq_lhs x == eq_rhs
//             ub_lhs x <= ub_rhs
//             lower <= x <= upper   (entries may be +-infinity)
struct LinearProgram {
    Vec objective;
    Mat eq_lhs;
    Vec eq_rhs;
    Mat ub_lhs;
    Vec ub_rhs;
    Vec lower;
    Vec upper;

    int num_vars() const { return static_cast<int>(objective.size()); }
    int num_constraints() const {
        return static_cast<int>(eq_rhs.size() + ub_rhs.size());
    }
    void validate() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(LpStatus s);

struct LpSolution {
    LpStatus status = LpStatus::IterationLimit;
    Vec x;                  // meaningful only when status == Optimal
    double objective_value = 0.0;
    Vec duals;              // one per row, equalities first; empty unless Optimal
    int iterations = 0;
};

// Two-phase primal simplex on a dense tableau with bounded variables.
// Bland's rule is always on, so the method terminates on degenerate
// problems (the doubly stochastic polytope is highly degenerate).
// `tol` is the pivot tolerance; primal feasibility of an Optimal result is
// certified to 1e-7 * (1 + max|rhs|) per constraint. max_iters < 0 selects
// the default 50 * (num_vars + num_constraints).
LpSolution solve(const LinearProgram& lp, double tol = 1e-9, int max_iters = -1);

}  // namespace omit
