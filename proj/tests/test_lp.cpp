#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "omit/lp.hpp"
#include "omit/rng.hpp"

using namespace omit;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LinearProgram blank(int n) {
    LinearProgram lp;
    lp.objective = Vec::Zero(n);
    lp.eq_lhs = Mat(0, n);
    lp.eq_rhs = Vec(0);
    lp.ub_lhs = Mat(0, n);
    lp.ub_rhs = Vec(0);
    lp.lower = Vec::Zero(n);
    lp.upper = Vec::Constant(n, kInf);
    return lp;
}

// doubly stochastic equality rows over vec(P), P row-major: x[i*n + j]
LinearProgram assignment_lp(const Mat& cost) {
    const int n = static_cast<int>(cost.rows());
    LinearProgram lp = blank(n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) lp.objective[i * n + j] = cost(i, j);
    lp.eq_lhs = Mat::Zero(2 * n, n * n);
    lp.eq_rhs = Vec::Ones(2 * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            lp.eq_lhs(i, i * n + j) = 1.0;      // row sums
            lp.eq_lhs(n + j, i * n + j) = 1.0;  // column sums
        }
    lp.upper = Vec::Ones(n * n);
    return lp;
}

double best_assignment(const Mat& cost) {
    const int n = static_cast<int>(cost.rows());
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = -kInf;
    do {
        double v = 0;
        for (int i = 0; i < n; ++i) v += cost(i, perm[i]);
        best = std::max(best, v);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace

TEST_CASE("single variable against an inequality") {
    LinearProgram lp = blank(1);
    lp.objective[0] = 1.0;
    lp.ub_lhs = Mat::Ones(1, 1);
    lp.ub_rhs = Vec::Ones(1);
    const LpSolution s = solve(lp);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.x[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(s.objective_value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("degenerate optimum on the unit simplex") {
    LinearProgram lp = blank(2);
    lp.objective = Vec::Ones(2);
    lp.eq_lhs = Mat::Ones(1, 2);
    lp.eq_rhs = Vec::Ones(1);
    lp.upper = Vec::Ones(2);
    const LpSolution s = solve(lp);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective_value == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(s.x.sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("contradictory equalities are infeasible") {
    LinearProgram lp = blank(1);
    lp.objective[0] = 1.0;
    lp.eq_lhs = Mat::Ones(2, 1);
    lp.eq_rhs = Vec(2);
    lp.eq_rhs << 1.0, 2.0;
    const LpSolution s = solve(lp);
    CHECK(s.status == LpStatus::Infeasible);
}

TEST_CASE("missing ceiling is unbounded") {
    LinearProgram lp = blank(1);
    lp.objective[0] = 1.0;
    const LpSolution s = solve(lp);
    CHECK(s.status == LpStatus::Unbounded);
}

TEST_CASE("tiny iteration budget reports the limit") {
    Mat cost(3, 3);
    cost << 1, 2, 3, 4, 5, 6, 9, 7, 8;
    const LpSolution s = solve(assignment_lp(cost), 1e-9, 1);
    CHECK(s.status == LpStatus::IterationLimit);
}

TEST_CASE("upper bounds participate in the optimum") {
    // max x + 2y, x + y <= 1.5, x,y in [0,1] -> (0.5, 1), objective 2.5
    LinearProgram lp = blank(2);
    lp.objective << 1.0, 2.0;
    lp.ub_lhs = Mat::Ones(1, 2);
    lp.ub_rhs = Vec::Constant(1, 1.5);
    lp.upper = Vec::Ones(2);
    const LpSolution s = solve(lp);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective_value == doctest::Approx(2.5).epsilon(1e-9));
    CHECK(s.x[0] == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(s.x[1] == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("negative bounds work") {
    LinearProgram lp = blank(1);
    lp.objective[0] = 1.0;
    lp.lower[0] = -3.0;
    lp.upper[0] = -1.0;
    const LpSolution s = solve(lp);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.x[0] == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("duals satisfy strong duality on a two-constraint program") {
    // max x + y, x + 2y <= 4, 3x + y <= 6
    LinearProgram lp = blank(2);
    lp.objective << 1.0, 1.0;
    lp.ub_lhs = Mat(2, 2);
    lp.ub_lhs << 1, 2, 3, 1;
    lp.ub_rhs = Vec(2);
    lp.ub_rhs << 4, 6;
    const LpSolution s = solve(lp);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective_value == doctest::Approx(2.8).epsilon(1e-9));
    REQUIRE(s.duals.size() == 2);
    CHECK(s.duals[0] == doctest::Approx(0.4).epsilon(1e-7));
    CHECK(s.duals[1] == doctest::Approx(0.2).epsilon(1e-7));
    CHECK(s.duals.dot(lp.ub_rhs) == doctest::Approx(s.objective_value).epsilon(1e-9));
}

TEST_CASE("complementary slackness holds") {
    // max x, x + y <= 2, y <= 5 (slack row gets dual 0)
    LinearProgram lp = blank(2);
    lp.objective << 1.0, 0.0;
    lp.ub_lhs = Mat(2, 2);
    lp.ub_lhs << 1, 1, 0, 1;
    lp.ub_rhs = Vec(2);
    lp.ub_rhs << 2, 5;
    const LpSolution s = solve(lp);
    REQUIRE(s.status == LpStatus::Optimal);
    for (int i = 0; i < 2; ++i) {
        const double slack = lp.ub_rhs[i] - lp.ub_lhs.row(i).dot(s.x);
        CHECK(std::abs(s.duals[i] * slack) <= 1e-7);
    }
}

TEST_CASE("assignment objective matches exhaustive search") {
    RngStream rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        Mat cost(6, 6);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) cost(i, j) = rng.next_double(-1.0, 1.0);
        const LpSolution s = solve(assignment_lp(cost));
        REQUIRE(s.status == LpStatus::Optimal);
        CHECK(s.objective_value == doctest::Approx(best_assignment(cost)).epsilon(1e-6));

        // primal feasibility of the returned point
        const Vec eq_res = assignment_lp(cost).eq_lhs * s.x - Vec::Ones(12);
        CHECK(eq_res.cwiseAbs().maxCoeff() <= 1e-7 * 2.0);
        CHECK(s.x.minCoeff() >= -1e-9);
    }
}

TEST_CASE("duplicate rows leave the optimum alone") {
    RngStream rng(5);
    Mat cost(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) cost(i, j) = rng.next_double(-1.0, 1.0);
    LinearProgram lp = assignment_lp(cost);
    const double base = solve(lp).objective_value;

    LinearProgram dup = lp;
    const int m = static_cast<int>(lp.eq_lhs.rows());
    dup.eq_lhs = Mat(m + 1, lp.num_vars());
    dup.eq_lhs << lp.eq_lhs, lp.eq_lhs.row(0);
    dup.eq_rhs = Vec(m + 1);
    dup.eq_rhs << lp.eq_rhs, lp.eq_rhs[0];
    const LpSolution s = solve(dup);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective_value == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("dimension mismatches are rejected") {
    LinearProgram lp = blank(2);
    lp.eq_lhs = Mat::Ones(1, 3);
    lp.eq_rhs = Vec::Ones(1);
    CHECK_THROWS_AS(lp.validate(), DataError);

    lp = blank(2);
    lp.eq_lhs = Mat::Ones(2, 2);
    lp.eq_rhs = Vec::Ones(1);
    CHECK_THROWS_AS(lp.validate(), DataError);

    lp = blank(2);
    lp.lower[0] = 2.0;
    lp.upper[0] = 1.0;
    CHECK_THROWS_AS(lp.validate(), DataError);
}

TEST_CASE("fixed variables are honored") {
    // x fixed at 0.25, maximize x + y with y <= 0.5
    LinearProgram lp = blank(2);
    lp.objective << 1.0, 1.0;
    lp.lower[0] = 0.25;
    lp.upper[0] = 0.25;
    lp.upper[1] = 0.5;
    const LpSolution s = solve(lp);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.x[0] == doctest::Approx(0.25));
    CHECK(s.objective_value == doctest::Approx(0.75).epsilon(1e-9));
}
