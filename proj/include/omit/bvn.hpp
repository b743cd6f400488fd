#pragma once

#include <vector>

#include "omit/types.hpp"

namespace omit {

// Raised when the support of the working matrix admits no perfect matching,
// i.e. the input was not doubly stochastic within tolerance.
struct NoPerfectMatching : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Convex combination of (truncated) permutation matrices:
//   P ~= sum_l theta_l * perm(sigma_l),   sum_l theta_l + residual = 1.
struct RankingDecomposition {
    struct Term {
        double theta = 0.0;
        Ranking sigma;
    };
    std::vector<Term> terms;
    double residual = 0.0;

    double total_weight() const;
    // sum_l theta_l * perm(sigma_l); rows = items, cols = positions
    // (cols = sigma length, which may be < rows for truncated terms).
    Mat reconstruct(int num_items) const;
};

// Birkhoff-von Neumann decomposition. Repeatedly finds a perfect matching
// on entries > zero_tol (Hopcroft-Karp, deterministic vertex order),
// extracts theta = min matched entry, and subtracts. For a matrix that is
// doubly stochastic within 1e-6 this terminates with residual <= 1e-6 and
// at most (N-1)^2 + 1 terms: every extraction zeroes at least one support
// entry and never merges support components, so the support face dimension
// |F| - 2N + #components strictly decreases from its maximum (N-1)^2.
RankingDecomposition decompose(const Mat& P, double zero_tol = 1e-9);

enum class Orientation { RowsSumOne, ColsSumOne };

// Rectangular matrix whose line sums along `orientation` are exactly 1 and
// whose cross line sums are <= 1 (a truncated doubly stochastic matrix).
struct PotentiallyDoublyStochastic {
    Mat matrix;
    Orientation orientation = Orientation::ColsSumOne;

    void validate(double tol = 1e-9) const;
};

// Fills the matrix up to a square doubly stochastic one by appending
// (n - k) lines across the orientation, each entry (1 - line sum) / (n - k).
// The original block is preserved verbatim; square input passes through.
Mat extend_to_doubly_stochastic(const PotentiallyDoublyStochastic& A);

// Decomposition of a rectangular matrix into truncated permutations, rows
// as items and columns as positions (RowsSumOne input is transposed first).
// The direct path greedily extracts column-saturating matchings, which can
// stall; on a stall it falls back to extending per
// extend_to_doubly_stochastic, decomposing the square, truncating each
// permutation to the real positions and merging equal truncations.
RankingDecomposition decompose_rectangular(const PotentiallyDoublyStochastic& A,
                                           double zero_tol = 1e-9,
                                           bool try_direct = true);

}  // namespace omit
