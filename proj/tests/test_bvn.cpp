#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "omit/bvn.hpp"
#include "omit/rng.hpp"
#include "omit/stochastic.hpp"

using namespace omit;

TEST_CASE("identity matrix is its own decomposition") {
    const RankingDecomposition d = decompose(Mat::Identity(4, 4));
    REQUIRE(d.terms.size() == 1);
    CHECK(d.terms[0].theta == doctest::Approx(1.0).epsilon(1e-12));
    for (int j = 0; j < 4; ++j) CHECK(d.terms[0].sigma.order[j] == j);
    CHECK(d.residual <= 1e-9);
}

TEST_CASE("uniform 2x2 splits into both permutations") {
    Mat P(2, 2);
    P << 0.5, 0.5, 0.5, 0.5;
    const RankingDecomposition d = decompose(P);
    REQUIRE(d.terms.size() == 2);
    CHECK(d.terms[0].theta == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(d.terms[1].theta == doctest::Approx(0.5).epsilon(1e-12));
    const bool first_is_id = d.terms[0].sigma.order == std::vector<int>{0, 1};
    const auto& other = first_is_id ? d.terms[1].sigma.order : d.terms[0].sigma.order;
    CHECK(other == std::vector<int>{1, 0});
    CHECK((d.reconstruct(2) - P).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("random balanced matrices decompose cleanly") {
    RngStream rng(13);
    for (int n : {2, 4, 8, 11}) {
        const Mat P = random_doubly_stochastic(n, rng);
        const RankingDecomposition d = decompose(P);
        CHECK(d.residual <= 1e-6);
        CHECK(static_cast<int>(d.terms.size()) <= (n - 1) * (n - 1) + 1);
        CHECK(d.total_weight() == doctest::Approx(1.0).epsilon(1e-9));
        for (const auto& t : d.terms) {
            CHECK(t.theta > 0.0);
            CHECK(is_permutation(t.sigma, n));
        }
        CHECK((d.reconstruct(n) - P).cwiseAbs().maxCoeff() <= 1e-6);
    }
}

TEST_CASE("slightly perturbed doubly stochastic input is accepted") {
    Mat P(2, 2);
    P << 0.5 + 5e-7, 0.5 - 5e-7, 0.5 - 5e-7, 0.5 + 5e-7;
    const RankingDecomposition d = decompose(P);
    CHECK(d.residual <= 1e-6);
    CHECK((d.reconstruct(2) - P).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("unbalanced input is refused with the deviation") {
    Mat A(2, 2);
    A << 1.0, 0.0, 1.0, 0.0;
    CHECK_THROWS_AS(decompose(A), NoPerfectMatching);
    try {
        decompose(A);
    } catch (const NoPerfectMatching& e) {
        CHECK(std::string(e.what()).find("1") != std::string::npos);
    }
}

TEST_CASE("extension fills missing mass evenly") {
    Mat A(4, 2);
    A << 0.2, 0.0, 0.0, 0.2, 0.8, 0.0, 0.0, 0.8;
    const Mat E = extend_to_doubly_stochastic({A, Orientation::ColsSumOne});
    Mat expect(4, 4);
    expect << 0.2, 0.0, 0.4, 0.4,  //
        0.0, 0.2, 0.4, 0.4,        //
        0.8, 0.0, 0.1, 0.1,        //
        0.0, 0.8, 0.1, 0.1;
    REQUIRE(E.rows() == 4);
    REQUIRE(E.cols() == 4);
    CHECK((E - expect).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("two-item one-position extension") {
    Mat A(2, 1);
    A << 0.3, 0.7;
    const Mat E = extend_to_doubly_stochastic({A, Orientation::ColsSumOne});
    Mat expect(2, 2);
    expect << 0.3, 0.7, 0.7, 0.3;
    CHECK((E - expect).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("square input passes through the extension unchanged") {
    Mat A(2, 2);
    A << 0.5, 0.5, 0.5, 0.5;
    const Mat E = extend_to_doubly_stochastic({A, Orientation::ColsSumOne});
    CHECK((E - A).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("row-oriented input is transposed first") {
    Mat A(1, 2);
    A << 0.3, 0.7;  // one row summing to 1
    const Mat E = extend_to_doubly_stochastic({A, Orientation::RowsSumOne});
    Mat expect(2, 2);
    expect << 0.3, 0.7, 0.7, 0.3;
    CHECK((E - expect).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("extension rejects invalid line sums") {
    Mat bad(2, 2);
    bad << 0.9, 0.2, 0.2, 0.9;  // columns sum to 1.1
    CHECK_THROWS_AS(extend_to_doubly_stochastic({bad, Orientation::ColsSumOne}), DataError);

    Mat wide(2, 3);  // more positions than items
    wide << 1, 1, 1, 0, 0, 0;
    CHECK_THROWS_AS(extend_to_doubly_stochastic({wide, Orientation::ColsSumOne}), DataError);
}

TEST_CASE("block-diagonal rectangular matrix needs only two terms") {
    Mat A(4, 2);
    A << 0.2, 0.0, 0.0, 0.2, 0.8, 0.0, 0.0, 0.8;
    const RankingDecomposition d = decompose_rectangular({A, Orientation::ColsSumOne});
    REQUIRE(d.terms.size() == 2);
    CHECK(d.terms[0].theta == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(d.terms[1].theta == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(d.terms[0].sigma.order == std::vector<int>{2, 3});
    CHECK(d.terms[1].sigma.order == std::vector<int>{0, 1});
    CHECK((d.reconstruct(4) - A).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("uniform three-by-two needs at least three terms") {
    const Mat A = Mat::Constant(3, 2, 1.0 / 3.0);
    for (bool direct : {true, false}) {
        const RankingDecomposition d =
            decompose_rectangular({A, Orientation::ColsSumOne}, 1e-9, direct);
        CHECK(d.terms.size() >= 3);
        CHECK(d.total_weight() == doctest::Approx(1.0).epsilon(1e-9));
        for (const auto& t : d.terms) CHECK(is_partial_permutation(t.sigma, 3));
        CHECK((d.reconstruct(3) - A).cwiseAbs().maxCoeff() <= 1e-6);
    }
}

TEST_CASE("square rectangular input matches the plain decomposition") {
    RngStream rng(3);
    const Mat P = random_doubly_stochastic(5, rng);
    const RankingDecomposition a = decompose(P);
    const RankingDecomposition b = decompose_rectangular({P, Orientation::ColsSumOne});
    REQUIRE(a.terms.size() == b.terms.size());
    for (size_t i = 0; i < a.terms.size(); ++i) {
        CHECK(a.terms[i].theta == doctest::Approx(b.terms[i].theta).epsilon(1e-12));
        CHECK(a.terms[i].sigma.order == b.terms[i].sigma.order);
    }
}

TEST_CASE("random truncations reconstruct") {
    RngStream rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 3 + static_cast<int>(rng.next_below(5));  // items
        const int k = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
        const Mat P = random_doubly_stochastic(n, rng);
        const Mat A = P.leftCols(k);
        const RankingDecomposition d =
            decompose_rectangular({A, Orientation::ColsSumOne});
        CHECK(d.total_weight() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK((d.reconstruct(n) - A).cwiseAbs().maxCoeff() <= 1e-6);
        for (const auto& t : d.terms) {
            CHECK(t.theta > 0.0);
            CHECK(is_partial_permutation(t.sigma, n));
            CHECK(static_cast<int>(t.sigma.order.size()) == k);
        }
    }
}
