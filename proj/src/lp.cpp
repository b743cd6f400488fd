#include "omit/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace omit {

const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "Optimal";
        case LpStatus::Infeasible: return "Infeasible";
        case LpStatus::Unbounded: return "Unbounded";
        case LpStatus::IterationLimit: return "IterationLimit";
    }
    throw InternalError("unknown LpStatus");
}

void LinearProgram::validate() const {
    const int n = num_vars();
    if (n == 0) throw DataError("lp: no variables");
    auto check_block = [&](const Mat& A, const Vec& rhs, const char* name) {
        if (A.rows() != rhs.size())
            throw DataError(std::string("lp: ") + name + " row count mismatch");
        if (A.rows() > 0 && A.cols() != n)
            throw DataError(std::string("lp: ") + name + " column count mismatch");
    };
    check_block(eq_lhs, eq_rhs, "eq");
    check_block(ub_lhs, ub_rhs, "ub");
    if (lower.size() != n || upper.size() != n)
        throw DataError("lp: bound vector size mismatch");
    for (int j = 0; j < n; ++j)
        if (lower[j] > upper[j]) throw DataError("lp: lower > upper at variable " + std::to_string(j));
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFeasTol = 1e-7;   // relative primal feasibility
constexpr double kTieEps = 1e-10;   // ratio-test tie window
constexpr int kRefactorEvery = 64;

enum class VarState : unsigned char { AtLower, AtUpper, Basic, FreeZero };

// Two-phase primal simplex over bounded variables. Nonbasic variables sit
// at one of their bounds (or 0 when free); Bland's entering/leaving rule is
// applied throughout, which guarantees termination on the heavily
// degenerate doubly stochastic programs this solver exists for.
class Simplex {
public:
    Simplex(const LinearProgram& lp, double tol, int max_iters)
        : tol_(tol), max_iters_(max_iters) {
        const int me = static_cast<int>(lp.eq_rhs.size());
        const int mu = static_cast<int>(lp.ub_rhs.size());
        m_ = me + mu;
        n_struct_ = lp.num_vars();
        n_slack_ = mu;
        art_start_ = n_struct_ + n_slack_;
        n_total_ = art_start_ + m_;

        A_ = Mat::Zero(m_, n_total_);
        b_ = Vec(m_);
        if (me > 0) {
            A_.topLeftCorner(me, n_struct_) = lp.eq_lhs;
            b_.head(me) = lp.eq_rhs;
        }
        if (mu > 0) {
            A_.block(me, 0, mu, n_struct_) = lp.ub_lhs;
            b_.tail(mu) = lp.ub_rhs;
            for (int i = 0; i < mu; ++i) A_(me + i, n_struct_ + i) = 1.0;
        }

        lo_ = Vec::Constant(n_total_, 0.0);
        hi_ = Vec::Constant(n_total_, kInf);
        lo_.head(n_struct_) = lp.lower;
        hi_.head(n_struct_) = lp.upper;

        obj_ = Vec::Zero(n_total_);
        obj_.head(n_struct_) = lp.objective;

        x_ = Vec::Zero(n_total_);
        state_.assign(n_total_, VarState::FreeZero);
        for (int j = 0; j < art_start_; ++j) {
            if (lo_[j] > -kInf) {
                x_[j] = lo_[j];
                state_[j] = VarState::AtLower;
            } else if (hi_[j] < kInf) {
                x_[j] = hi_[j];
                state_[j] = VarState::AtUpper;
            }
        }

        // starting basis: slack where it already covers the row, artificial
        // otherwise; either way B is a signed identity
        Vec r = b_ - A_.leftCols(art_start_) * x_.head(art_start_);
        basis_.resize(m_);
        Binv_ = Mat::Zero(m_, m_);
        for (int i = 0; i < m_; ++i) {
            const int slack = i - me >= 0 ? n_struct_ + (i - me) : -1;
            if (slack >= 0 && r[i] >= 0.0) {
                basis_[i] = slack;
                x_[slack] = r[i];
                Binv_(i, i) = 1.0;
            } else {
                const int art = art_start_ + i;
                A_(i, art) = r[i] >= 0.0 ? 1.0 : -1.0;
                basis_[i] = art;
                x_[art] = std::abs(r[i]);
                Binv_(i, i) = A_(i, art);
            }
            state_[basis_[i]] = VarState::Basic;
        }
        // artificials for rows a slack already covers never carry value;
        // pin them so phase 1 cannot drive them along their zero columns
        for (int j = art_start_; j < n_total_; ++j) {
            if (state_[j] == VarState::Basic) continue;
            lo_[j] = hi_[j] = 0.0;
            x_[j] = 0.0;
            state_[j] = VarState::AtLower;
        }
    }

    LpSolution run(const LinearProgram& lp) {
        Vec phase1 = Vec::Zero(n_total_);
        phase1.tail(m_).setConstant(-1.0);

        LpSolution sol;
        const RunEnd p1 = iterate(phase1, true);
        if (p1 == RunEnd::IterationLimit) {
            sol.status = LpStatus::IterationLimit;
            sol.iterations = iters_;
            return sol;
        }
        double infeas = 0.0;
        for (int j = art_start_; j < n_total_; ++j) infeas += x_[j];
        const double bscale = 1.0 + (m_ > 0 ? b_.cwiseAbs().maxCoeff() : 0.0);
        if (infeas > kFeasTol * bscale) {
            sol.status = LpStatus::Infeasible;
            sol.iterations = iters_;
            return sol;
        }
        retire_artificials();

        const RunEnd p2 = iterate(obj_, false);
        sol.iterations = iters_;
        if (p2 == RunEnd::IterationLimit) {
            sol.status = LpStatus::IterationLimit;
            return sol;
        }
        if (p2 == RunEnd::Unbounded) {
            sol.status = LpStatus::Unbounded;
            return sol;
        }

        refactorize();
        compute_basic_values();
        sol.status = LpStatus::Optimal;
        sol.x = x_.head(n_struct_);
        for (int j = 0; j < n_struct_; ++j) {
            if (lo_[j] > -kInf) sol.x[j] = std::max(sol.x[j], lo_[j]);
            if (hi_[j] < kInf) sol.x[j] = std::min(sol.x[j], hi_[j]);
        }
        sol.objective_value = lp.objective.dot(sol.x);
        Vec cB(m_);
        for (int i = 0; i < m_; ++i) cB[i] = obj_[basis_[i]];
        sol.duals = Binv_.transpose() * cB;
        certify(lp, sol);
        return sol;
    }

private:
    enum class RunEnd { Optimal, Unbounded, IterationLimit };

    void refactorize() {
        Mat B(m_, m_);
        for (int i = 0; i < m_; ++i) B.col(i) = A_.col(basis_[i]);
        Binv_ = B.partialPivLu().inverse();
    }

    void compute_basic_values() {
        Vec r = b_;
        for (int j = 0; j < n_total_; ++j)
            if (state_[j] != VarState::Basic && x_[j] != 0.0) r -= A_.col(j) * x_[j];
        const Vec xb = Binv_ * r;
        for (int i = 0; i < m_; ++i) x_[basis_[i]] = xb[i];
    }

    // once an artificial leaves the basis it is fixed at zero for good
    void retire_artificials() {
        for (int i = 0; i < m_; ++i) {
            const int bi = basis_[i];
            if (bi < art_start_) continue;
            // try to swap the zero-valued artificial for a structural column
            bool pivoted = false;
            for (int j = 0; j < art_start_ && !pivoted; ++j) {
                if (state_[j] == VarState::Basic || lo_[j] == hi_[j]) continue;
                const double alpha = Binv_.row(i).dot(A_.col(j));
                if (std::abs(alpha) <= 1e-7) continue;
                Vec w = Binv_ * A_.col(j);
                pivot(i, j, w);
                state_[bi] = VarState::AtLower;
                x_[bi] = 0.0;
                pivoted = true;
            }
            // an unswappable row is linearly dependent; its artificial stays
            // basic, pinned at zero by its bounds
        }
        for (int j = art_start_; j < n_total_; ++j) {
            lo_[j] = hi_[j] = 0.0;
            if (state_[j] != VarState::Basic) {
                x_[j] = 0.0;
                state_[j] = VarState::AtLower;
            }
        }
        refactorize();
        compute_basic_values();
    }

    void pivot(int row, int entering, const Vec& w) {
        basis_[row] = entering;
        state_[entering] = VarState::Basic;
        Binv_.row(row) /= w[row];
        for (int r = 0; r < m_; ++r)
            if (r != row) Binv_.row(r) -= w[r] * Binv_.row(row);
        if (++pivots_since_refactor_ >= kRefactorEvery) {
            refactorize();
            compute_basic_values();
            pivots_since_refactor_ = 0;
        }
    }

    RunEnd iterate(const Vec& c, bool phase1) {
        for (;;) {
            if (iters_ >= max_iters_) return RunEnd::IterationLimit;

            Vec cB(m_);
            for (int i = 0; i < m_; ++i) cB[i] = c[basis_[i]];
            const Vec y = Binv_.transpose() * cB;

            // Bland: smallest-index eligible column enters
            int q = -1;
            double dq = 0.0;
            int dir = 0;
            for (int j = 0; j < n_total_; ++j) {
                if (state_[j] == VarState::Basic || lo_[j] == hi_[j]) continue;
                const double d = c[j] - y.dot(A_.col(j));
                if (state_[j] == VarState::AtLower && d > tol_) {
                    q = j; dq = d; dir = 1;
                } else if (state_[j] == VarState::AtUpper && d < -tol_) {
                    q = j; dq = d; dir = -1;
                } else if (state_[j] == VarState::FreeZero && std::abs(d) > tol_) {
                    q = j; dq = d; dir = d > 0 ? 1 : -1;
                } else {
                    continue;
                }
                break;
            }
            (void)dq;
            if (q < 0) return RunEnd::Optimal;

            const Vec w = Binv_ * A_.col(q);

            // ratio test; the entering variable's own opposite bound is the
            // initial blocking candidate
            double t_best = kInf;
            if (lo_[q] > -kInf && hi_[q] < kInf) t_best = hi_[q] - lo_[q];
            int leave_row = -1;           // -1: bound flip
            int leave_var = q;
            bool leave_to_upper = false;
            for (int i = 0; i < m_; ++i) {
                const double wi = dir * w[i];
                const int bi = basis_[i];
                double t;
                bool to_upper;
                if (wi > tol_) {
                    if (lo_[bi] <= -kInf) continue;
                    t = (x_[bi] - lo_[bi]) / wi;
                    to_upper = false;
                } else if (wi < -tol_) {
                    if (hi_[bi] >= kInf) continue;
                    t = (hi_[bi] - x_[bi]) / (-wi);
                    to_upper = true;
                } else {
                    continue;
                }
                t = std::max(t, 0.0);
                if (t < t_best - kTieEps) {
                    t_best = t;
                    leave_row = i;
                    leave_var = bi;
                    leave_to_upper = to_upper;
                } else if (t <= t_best + kTieEps && bi < leave_var) {
                    // Bland tie-break on the leaving variable index
                    t_best = std::min(t_best, t);
                    leave_row = i;
                    leave_var = bi;
                    leave_to_upper = to_upper;
                }
            }

            if (t_best >= kInf) {
                if (phase1)
                    throw InternalError("phase-1 objective cannot be unbounded");
                return RunEnd::Unbounded;
            }

            ++iters_;
            const double step = dir * t_best;
            x_[q] += step;
            for (int i = 0; i < m_; ++i) x_[basis_[i]] -= step * w[i];

            if (leave_row < 0) {
                // entering variable runs to its other bound; basis unchanged
                state_[q] = dir > 0 ? VarState::AtUpper : VarState::AtLower;
                x_[q] = dir > 0 ? hi_[q] : lo_[q];
            } else {
                const int l = basis_[leave_row];
                state_[l] = leave_to_upper ? VarState::AtUpper : VarState::AtLower;
                x_[l] = leave_to_upper ? hi_[l] : lo_[l];
                if (l >= art_start_) { lo_[l] = 0.0; hi_[l] = 0.0; x_[l] = 0.0; }
                pivot(leave_row, q, w);
            }
        }
    }

    void certify(const LinearProgram& lp, const LpSolution& sol) const {
        const double scale =
            1.0 + std::max(lp.eq_rhs.size() ? lp.eq_rhs.cwiseAbs().maxCoeff() : 0.0,
                           lp.ub_rhs.size() ? lp.ub_rhs.cwiseAbs().maxCoeff() : 0.0);
        const double tol = kFeasTol * scale;
        if (lp.eq_rhs.size() &&
            (lp.eq_lhs * sol.x - lp.eq_rhs).cwiseAbs().maxCoeff() > tol)
            throw InternalError("simplex: equality residual above tolerance");
        if (lp.ub_rhs.size() &&
            (lp.ub_lhs * sol.x - lp.ub_rhs).maxCoeff() > tol)
            throw InternalError("simplex: inequality violated above tolerance");
    }

    double tol_;
    int max_iters_;
    int m_ = 0, n_struct_ = 0, n_slack_ = 0, art_start_ = 0, n_total_ = 0;
    Mat A_;
    Vec b_, lo_, hi_, obj_, x_;
    std::vector<int> basis_;
    std::vector<VarState> state_;
    Mat Binv_;
    int iters_ = 0;
    int pivots_since_refactor_ = 0;
};

}  // namespace

LpSolution solve(const LinearProgram& lp, double tol, int max_iters) {
    lp.validate();
    if (max_iters < 0) max_iters = 50 * (lp.num_vars() + lp.num_constraints());
    Simplex s(lp, tol, max_iters);
    return s.run(lp);
}

}  // namespace omit
