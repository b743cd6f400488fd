#pragma once

#include <optional>

#include "omit/lp.hpp"
#include "omit/types.hpp"

namespace omit {

// Position attention v_j = 1 / log_base(1 + j), j = 1..N. Strictly
// decreasing, v_1 = 1 / log_base(2).
Vec attention_vector(int n, double base = 2.0);

// Indicator of the first k positions, k clamped to [1, N].
Vec top_k_mask(int n, int k);

// Raised when a group is empty or has zero total utility; the caller drops
// the fairness constraint and records that it did.
struct FairnessUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class FairnessVariant {
    // f_i = 1{dis} / sum_dis u  -  1{priv} / sum_priv u, so f' P v = 0 is
    // exactly "disparate treatment ratio = 1".
    DtrExact,
    // group-size-normalized variant: divides each side by the group size
    // as well.
    SizeNormalized,
};

Vec fairness_vector(const QueryInstance& q, FairnessVariant variant = FairnessVariant::DtrExact);

// dTR(P): ratio of utility-normalized expected group exposures,
// disadvantaged over privileged. 1 is parity. Empty group or zero group
// utility makes it undefined (nullopt).
std::optional<double> dtr(const Mat& P, const QueryInstance& q, const Vec& attention);

enum class ConstraintMode { Hard, Soft };

// One query's ranking polytope program. o all-zero recovers the
// fairness-only objective; lambda_o scales the top-k outlierness penalty.
struct FairRankProblem {
    Vec u;                    // item utilities
    Vec v;                    // position attention
    Vec o;                    // outlier degrees (0 for clean items)
    Vec h;                    // top-k position mask
    std::optional<Vec> f;     // fairness direction; absent = unconstrained
    ConstraintMode mode = ConstraintMode::Hard;
    double lambda_o = 1.0;
    double lambda_s = 10.0;   // soft-mode column slack penalty

    int size() const { return static_cast<int>(u.size()); }
    void validate() const;
};

// Variables x[(i * N) + j] = P_ij in [0, 1].
// Hard: row sums == 1 and column sums == 1 (one redundant row is fine for
// the solver). Soft: row sums == 1; column j carries slacks s+_j, s-_j >= 0
// with col_j - s+_j + s-_j == 1 and objective penalty -lambda_s * sum(s).
// When f is present, the equality f' P v == 0 is appended.
// Objective: sum_ij (u_i v_j - lambda_o o_i h_j) P_ij.
LinearProgram assemble_lp(const FairRankProblem& prob);

enum class Provenance { Solved, FallbackInitial };

const char* to_string(Provenance p);

struct MarginalRankMatrix {
    Mat P;  // rows = items, cols = positions; doubly stochastic within 1e-6
    Provenance provenance = Provenance::Solved;
    double objective = 0.0;  // achieved objective of prob under P
};

// Solves the program and returns the expected-rank matrix. Infeasible or
// iteration-limited solves fall back to the permutation matrix of
// `initial`; Soft-mode solutions are Sinkhorn-projected back onto the
// doubly stochastic polytope (residual 1e-8, 1000 iterations) and a failed
// projection also falls back. Unbounded raises InternalError: the polytope
// is bounded, so an unbounded program is a construction bug.
MarginalRankMatrix solve_omit(const FairRankProblem& prob, const Ranking& initial);

// Same program with the outlierness term removed.
MarginalRankMatrix solve_foe(FairRankProblem prob, const Ranking& initial);

struct RemoveOutliersResult {
    Ranking ranking;
    bool all_flagged = false;  // true: nothing could be removed, input returned
};

// Deletes flagged items from `initial` and appends them after the clean
// ones, both sides keeping their relative order.
RemoveOutliersResult remove_outliers_baseline(const Ranking& initial,
                                              const Eigen::VectorXi& binary);

}  // namespace omit
