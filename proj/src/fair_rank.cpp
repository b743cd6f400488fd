#include "omit/fair_rank.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "omit/stochastic.hpp"

namespace omit {

Vec attention_vector(int n, double base) {
    if (n < 1) throw DataError("attention_vector: n must be >= 1");
    if (base <= 1) throw DataError("attention_vector: base must be > 1");
    Vec v(n);
    const double lb = std::log(base);
    for (int j = 0; j < n; ++j) v[j] = lb / std::log(2.0 + j);
    return v;
}

Vec top_k_mask(int n, int k) {
    if (n < 1) throw DataError("top_k_mask: n must be >= 1");
    if (k < 1) throw DataError("top_k_mask: k must be >= 1");
    k = std::min(k, n);
    Vec h = Vec::Zero(n);
    h.head(k).setOnes();
    return h;
}

Vec fairness_vector(const QueryInstance& q, FairnessVariant variant) {
    const int n = q.size();
    double sum_dis = 0, sum_priv = 0;
    int n_dis = 0, n_priv = 0;
    for (const Item& it : q.items) {
        if (it.group == Group::Dis) {
            sum_dis += it.utility;
            ++n_dis;
        } else {
            sum_priv += it.utility;
            ++n_priv;
        }
    }
    if (n_dis == 0 || n_priv == 0)
        throw FairnessUnavailable("query \"" + q.qid + "\": a group is empty");
    if (sum_dis <= 0 || sum_priv <= 0)
        throw FairnessUnavailable("query \"" + q.qid + "\": a group has zero total utility");

    double w_dis = 1.0 / sum_dis;
    double w_priv = 1.0 / sum_priv;
    if (variant == FairnessVariant::SizeNormalized) {
        w_dis /= n_dis;
        w_priv /= n_priv;
    }
    Vec f(n);
    for (int i = 0; i < n; ++i)
        f[i] = q.items[i].group == Group::Dis ? w_dis : -w_priv;
    return f;
}

std::optional<double> dtr(const Mat& P, const QueryInstance& q, const Vec& attention) {
    const Vec expo = P * attention;
    double exp_dis = 0, exp_priv = 0, u_dis = 0, u_priv = 0;
    for (int i = 0; i < q.size(); ++i) {
        if (q.items[i].group == Group::Dis) {
            exp_dis += expo[i];
            u_dis += q.items[i].utility;
        } else {
            exp_priv += expo[i];
            u_priv += q.items[i].utility;
        }
    }
    if (u_dis <= 0 || u_priv <= 0 || exp_priv <= 0) return std::nullopt;
    return (exp_dis / u_dis) / (exp_priv / u_priv);
}

void FairRankProblem::validate() const {
    const int n = size();
    if (n < 1) throw DataError("fair rank problem: empty");
    if (v.size() != n || o.size() != n || h.size() != n)
        throw DataError("fair rank problem: vector size mismatch");
    if (f && f->size() != n) throw DataError("fair rank problem: fairness vector size mismatch");
    if (lambda_s < 0 || lambda_o < 0) throw DataError("fair rank problem: negative lambda");
}

LinearProgram assemble_lp(const FairRankProblem& prob) {
    prob.validate();
    const int n = prob.size();
    const int np = n * n;
    const bool soft = prob.mode == ConstraintMode::Soft;
    const int num_vars = soft ? np + 2 * n : np;  // soft adds s+_j, s-_j per column
    const int rows = 2 * n + (prob.f ? 1 : 0);

    LinearProgram lp;
    lp.objective = Vec::Zero(num_vars);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            lp.objective[i * n + j] = prob.u[i] * prob.v[j] - prob.lambda_o * prob.o[i] * prob.h[j];
    if (soft)
        for (int j = 0; j < 2 * n; ++j) lp.objective[np + j] = -prob.lambda_s;

    lp.eq_lhs = Mat::Zero(rows, num_vars);
    lp.eq_rhs = Vec::Ones(rows);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) lp.eq_lhs(i, i * n + j) = 1.0;  // row sums
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) lp.eq_lhs(n + j, i * n + j) = 1.0;  // column sums
        if (soft) {
            lp.eq_lhs(n + j, np + j) = -1.0;      // s+_j
            lp.eq_lhs(n + j, np + n + j) = 1.0;   // s-_j
        }
    }
    if (prob.f) {
        const int r = 2 * n;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) lp.eq_lhs(r, i * n + j) = (*prob.f)[i] * prob.v[j];
        lp.eq_rhs[r] = 0.0;
    }

    lp.ub_lhs = Mat::Zero(0, num_vars);
    lp.ub_rhs = Vec::Zero(0);
    lp.lower = Vec::Zero(num_vars);
    lp.upper = Vec::Constant(num_vars, std::numeric_limits<double>::infinity());
    lp.upper.head(np).setOnes();
    return lp;
}

namespace {

double achieved_objective(const FairRankProblem& prob, const Mat& P) {
    return prob.u.dot(P * prob.v) - prob.lambda_o * prob.o.dot(P * prob.h);
}

MarginalRankMatrix fallback(const FairRankProblem& prob, const Ranking& initial) {
    MarginalRankMatrix m;
    m.P = permutation_matrix(initial);
    m.provenance = Provenance::FallbackInitial;
    m.objective = achieved_objective(prob, m.P);
    return m;
}

}  // namespace

MarginalRankMatrix solve_omit(const FairRankProblem& prob, const Ranking& initial) {
    prob.validate();
    const int n = prob.size();
    if (!is_permutation(initial, n))
        throw DataError("solve_omit: initial ranking is not a permutation");

    const LinearProgram lp = assemble_lp(prob);
    const LpSolution sol = solve(lp);
    if (sol.status == LpStatus::Unbounded)
        throw InternalError("ranking program came back unbounded; the polytope is bounded");
    if (sol.status != LpStatus::Optimal) return fallback(prob, initial);

    Mat P(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) P(i, j) = std::clamp(sol.x[i * n + j], 0.0, 1.0);

    if (prob.mode == ConstraintMode::Soft) {
        const SinkhornResult proj = sinkhorn_balance(P, 1e-8, 1000);
        if (!proj.converged) return fallback(prob, initial);  // unscalable support
        P = proj.matrix;
    }
    if (doubly_stochastic_residual(P) > 1e-6)
        throw InternalError("solved ranking matrix is not doubly stochastic");

    MarginalRankMatrix m;
    m.P = std::move(P);
    m.provenance = Provenance::Solved;
    m.objective = achieved_objective(prob, m.P);
    return m;
}

MarginalRankMatrix solve_foe(FairRankProblem prob, const Ranking& initial) {
    prob.o.setZero();
    return solve_omit(prob, initial);
}

const char* to_string(Provenance p) {
    return p == Provenance::Solved ? "Solved" : "FallbackInitial";
}

RemoveOutliersResult remove_outliers_baseline(const Ranking& initial,
                                              const Eigen::VectorXi& binary) {
    const int n = initial.size();
    if (binary.size() != n)
        throw DataError("remove_outliers_baseline: flag vector size mismatch");
    RemoveOutliersResult res;
    std::vector<int> clean, flagged;
    for (int pos = 0; pos < n; ++pos) {
        const int item = initial.order[pos];
        (binary[item] ? flagged : clean).push_back(item);
    }
    if (clean.empty()) {
        res.ranking = initial;
        res.all_flagged = true;
        return res;
    }
    res.ranking.order = clean;
    res.ranking.order.insert(res.ranking.order.end(), flagged.begin(), flagged.end());
    return res;
}

}  // namespace omit
