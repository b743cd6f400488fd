#include "omit/bvn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <sstream>

#include "omit/stochastic.hpp"

namespace omit {

double RankingDecomposition::total_weight() const {
    double t = 0.0;
    for (const Term& term : terms) t += term.theta;
    return t;
}

Mat RankingDecomposition::reconstruct(int num_items) const {
    const int positions = terms.empty() ? 0 : terms.front().sigma.size();
    Mat P = Mat::Zero(num_items, positions);
    for (const Term& term : terms) {
        if (term.sigma.size() != positions)
            throw InternalError("decomposition mixes term lengths");
        for (int pos = 0; pos < positions; ++pos)
            P(term.sigma.order[pos], pos) += term.theta;
    }
    return P;
}

namespace {

// Hopcroft-Karp maximum matching, left vertices to right vertices.
// Adjacency is kept in ascending order and vertices are scanned in
// ascending order, so the matching is deterministic.
class HopcroftKarp {
public:
    HopcroftKarp(int nl, int nr) : nl_(nl), adj_(nl), ml_(nl, -1), mr_(nr, -1) {}

    void add_edge(int l, int r) { adj_[l].push_back(r); }

    int solve() {
        int matching = 0;
        while (bfs())
            for (int l = 0; l < nl_; ++l)
                if (ml_[l] < 0 && dfs(l)) ++matching;
        return matching;
    }

    const std::vector<int>& left_match() const { return ml_; }

private:
    bool bfs() {
        std::queue<int> q;
        dist_.assign(nl_, -1);
        for (int l = 0; l < nl_; ++l)
            if (ml_[l] < 0) {
                dist_[l] = 0;
                q.push(l);
            }
        bool reachable = false;
        while (!q.empty()) {
            const int l = q.front();
            q.pop();
            for (int r : adj_[l]) {
                const int l2 = mr_[r];
                if (l2 < 0) {
                    reachable = true;
                } else if (dist_[l2] < 0) {
                    dist_[l2] = dist_[l] + 1;
                    q.push(l2);
                }
            }
        }
        return reachable;
    }

    bool dfs(int l) {
        for (int r : adj_[l]) {
            const int l2 = mr_[r];
            if (l2 < 0 || (dist_[l2] == dist_[l] + 1 && dfs(l2))) {
                ml_[l] = r;
                mr_[r] = l;
                return true;
            }
        }
        dist_[l] = -1;
        return false;
    }

    int nl_;
    std::vector<std::vector<int>> adj_;
    std::vector<int> ml_, mr_, dist_;
};

std::string deviation_message(const Mat& P) {
    std::ostringstream os;
    os << "max line-sum deviation " << doubly_stochastic_residual(P);
    return os.str();
}

}  // namespace

RankingDecomposition decompose(const Mat& P, double zero_tol) {
    const int n = static_cast<int>(P.rows());
    if (n == 0 || P.cols() != n)
        throw NoPerfectMatching("decompose: matrix must be square and non-empty");
    if (P.minCoeff() < -zero_tol || doubly_stochastic_residual(P) > 1e-6)
        throw NoPerfectMatching("decompose: input not doubly stochastic (" +
                                deviation_message(P) + ")");

    Mat R = P.cwiseMax(0.0);
    RankingDecomposition out;
    const size_t max_terms = static_cast<size_t>(n - 1) * (n - 1) + 1;
    double total = 0.0;

    while (out.terms.size() < max_terms) {
        HopcroftKarp hk(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (R(i, j) > zero_tol) hk.add_edge(i, j);
        if (hk.solve() < n) break;
        const std::vector<int>& match = hk.left_match();

        double theta = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) theta = std::min(theta, R(i, match[i]));

        RankingDecomposition::Term term;
        term.theta = theta;
        term.sigma.order.assign(n, -1);
        for (int i = 0; i < n; ++i) term.sigma.order[match[i]] = i;
        if (!is_permutation(term.sigma, n))
            throw InternalError("decompose: extracted term is not a permutation");
        out.terms.push_back(std::move(term));

        for (int i = 0; i < n; ++i) R(i, match[i]) -= theta;
        total += theta;
    }

    out.residual = std::max(0.0, 1.0 - total);
    if (out.residual > 1e-6)
        throw NoPerfectMatching("decompose: support exhausted with residual " +
                                std::to_string(out.residual) + " (" + deviation_message(P) + ")");
    return out;
}

void PotentiallyDoublyStochastic::validate(double tol) const {
    if (matrix.rows() == 0 || matrix.cols() == 0)
        throw DataError("potentially doubly stochastic matrix is empty");
    if (matrix.minCoeff() < -tol || matrix.maxCoeff() > 1 + tol)
        throw DataError("entries must lie in [0, 1]");
    const Mat M = orientation == Orientation::ColsSumOne ? matrix : matrix.transpose();
    // every column carries total mass 1, no row more than 1
    if ((M.colwise().sum().array() - 1.0).abs().maxCoeff() > tol)
        throw DataError("line sums along the orientation must equal 1");
    if ((M.rowwise().sum().array() - 1.0).maxCoeff() > tol)
        throw DataError("cross line sums must not exceed 1");
    if (M.rows() < M.cols())
        throw DataError("cannot have more unit lines than cross lines");
}

Mat extend_to_doubly_stochastic(const PotentiallyDoublyStochastic& A) {
    A.validate();
    const Mat M = A.orientation == Orientation::ColsSumOne ? A.matrix
                                                           : Mat(A.matrix.transpose());
    const int n = static_cast<int>(M.rows());
    const int k = static_cast<int>(M.cols());
    if (n == k) return A.matrix;
    Mat E(n, n);
    E.leftCols(k) = M;
    const Vec fill = ((1.0 - M.rowwise().sum().array()) / (n - k)).cwiseMax(0.0);
    for (int j = k; j < n; ++j) E.col(j) = fill;
    return E;
}

namespace {

void canonicalize(RankingDecomposition& d) {
    std::map<std::vector<int>, double> merged;
    for (const auto& t : d.terms) merged[t.sigma.order] += t.theta;
    d.terms.clear();
    for (auto& [order, theta] : merged) {
        RankingDecomposition::Term t;
        t.theta = theta;
        t.sigma.order = order;
        d.terms.push_back(std::move(t));
    }
    std::stable_sort(d.terms.begin(), d.terms.end(), [](const auto& a, const auto& b) {
        if (a.theta != b.theta) return a.theta > b.theta;
        return a.sigma.order < b.sigma.order;
    });
}

// Greedy truncated extraction: match every real position to a distinct
// item and peel off the minimum matched mass. Completes exactly when the
// remaining mass hits zero; can stall even on valid input, in which case
// the caller retries via the square extension.
bool direct_rectangular(const Mat& M, double zero_tol, RankingDecomposition& out) {
    const int n = static_cast<int>(M.rows());
    const int k = static_cast<int>(M.cols());
    Mat R = M.cwiseMax(0.0);
    double total = 0.0;
    const size_t max_terms = static_cast<size_t>(n - 1) * (n - 1) + 1;

    while (out.terms.size() < max_terms) {
        HopcroftKarp hk(k, n);  // left = positions, right = items
        for (int j = 0; j < k; ++j)
            for (int i = 0; i < n; ++i)
                if (R(i, j) > zero_tol) hk.add_edge(j, i);
        if (hk.solve() < k) break;
        const std::vector<int>& match = hk.left_match();

        double theta = std::numeric_limits<double>::infinity();
        for (int j = 0; j < k; ++j) theta = std::min(theta, R(match[j], j));

        RankingDecomposition::Term term;
        term.theta = theta;
        term.sigma.order.assign(match.begin(), match.end());
        out.terms.push_back(std::move(term));

        for (int j = 0; j < k; ++j) R(match[j], j) -= theta;
        total += theta;
    }
    out.residual = std::max(0.0, 1.0 - total);
    return out.residual <= 1e-6;
}

}  // namespace

RankingDecomposition decompose_rectangular(const PotentiallyDoublyStochastic& A,
                                           double zero_tol, bool try_direct) {
    A.validate();
    const Mat M = A.orientation == Orientation::ColsSumOne ? A.matrix
                                                           : Mat(A.matrix.transpose());
    const int n = static_cast<int>(M.rows());
    const int k = static_cast<int>(M.cols());
    if (n == k) return decompose(M, zero_tol);

    if (try_direct) {
        RankingDecomposition direct;
        if (direct_rectangular(M, zero_tol, direct)) {
            canonicalize(direct);
            return direct;
        }
    }

    RankingDecomposition square = decompose(extend_to_doubly_stochastic(A), zero_tol);
    RankingDecomposition out;
    out.residual = square.residual;
    for (auto& term : square.terms) {
        term.sigma.order.resize(k);  // positions beyond k are padding
        out.terms.push_back(std::move(term));
    }
    canonicalize(out);
    return out;
}

}  // namespace omit
