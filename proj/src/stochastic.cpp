#include "omit/stochastic.hpp"

#include <cmath>
#include <limits>

namespace omit {

Mat permutation_matrix(const Ranking& r) {
    const int n = r.size();
    if (!is_permutation(r, n)) throw InternalError("permutation_matrix: not a permutation");
    Mat P = Mat::Zero(n, n);
    for (int pos = 0; pos < n; ++pos) P(r.order[pos], pos) = 1.0;
    return P;
}

double doubly_stochastic_residual(const Mat& P) {
    if (P.rows() != P.cols() || P.rows() == 0)
        return std::numeric_limits<double>::infinity();
    const double row = (P.rowwise().sum().array() - 1.0).abs().maxCoeff();
    const double col = (P.colwise().sum().array() - 1.0).abs().maxCoeff();
    return std::max(row, col);
}

bool is_doubly_stochastic(const Mat& P, double tol) {
    if (P.rows() != P.cols() || P.rows() == 0) return false;
    if (P.minCoeff() < -tol) return false;
    return doubly_stochastic_residual(P) <= tol;
}

SinkhornResult sinkhorn_balance(const Mat& A, double tol, int max_iters) {
    if (A.rows() != A.cols() || A.rows() == 0)
        throw DataError("sinkhorn: matrix must be square and non-empty");
    if (A.minCoeff() < 0) throw DataError("sinkhorn: negative entry");
    SinkhornResult res;
    res.matrix = A;
    Mat& M = res.matrix;
    for (int it = 0; it < max_iters; ++it) {
        res.residual = doubly_stochastic_residual(M);
        if (res.residual <= tol) {
            res.iterations = it;
            res.converged = true;
            return res;
        }
        Vec rows = M.rowwise().sum();
        for (int i = 0; i < M.rows(); ++i)
            if (rows[i] > 0) M.row(i) /= rows[i];
        Vec cols = M.colwise().sum();
        for (int j = 0; j < M.cols(); ++j)
            if (cols[j] > 0) M.col(j) /= cols[j];
    }
    res.residual = doubly_stochastic_residual(M);
    res.iterations = max_iters;
    res.converged = res.residual <= tol;
    return res;
}

Mat random_doubly_stochastic(int n, RngStream& rng, double tol) {
    Mat A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = 0.05 + rng.next_double();
    SinkhornResult r = sinkhorn_balance(A, tol, 100000);
    if (!r.converged) throw InternalError("random_doubly_stochastic failed to balance");
    return r.matrix;
}

}  // namespace omit
