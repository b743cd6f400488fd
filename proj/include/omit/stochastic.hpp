#pragma once

#include "omit/rng.hpp"
#include "omit/types.hpp"

namespace omit {

// N x N permutation matrix of a full ranking: row = item, column = position.
Mat permutation_matrix(const Ranking& r);

// max deviation of any row or column sum from 1.
double doubly_stochastic_residual(const Mat& P);

bool is_doubly_stochastic(const Mat& P, double tol = 1e-6);

struct SinkhornResult {
    Mat matrix;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Alternating row/column normalization. Preserves zeros and nonnegativity;
// fails to converge (converged = false) when the support admits no doubly
// stochastic scaling, e.g. an all-zero line.
SinkhornResult sinkhorn_balance(const Mat& A, double tol = 1e-8, int max_iters = 1000);

// Entrywise-positive random matrix balanced to a doubly stochastic one.
// Test/benchmark helper.
Mat random_doubly_stochastic(int n, RngStream& rng, double tol = 1e-12);

}  // namespace omit
