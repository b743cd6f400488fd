#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "omit/bvn.hpp"
#include "omit/fair_rank.hpp"
#include "omit/outlier.hpp"
#include "omit/rng.hpp"
#include "omit/types.hpp"

namespace omit {

// Expected attention per item: (P v)_i. Sums to sum(v) whenever P is
// doubly stochastic.
Vec exposure(const Mat& P, const Vec& v);

// u' P v
double expected_utility(const Mat& P, const Vec& u, const Vec& v);

// o' P h: expected top-k outlier mass. Pass binary scores for the expected
// flagged-item count.
double outlierness_at_k(const Mat& P, const Vec& o, const Vec& h);

// Same under a single deterministic ranking.
double ranking_outlierness(const Ranking& sigma, const Vec& o, const Vec& h);

// NDCG@k with linear gain: DCG = sum_{j<=k} rel_{sigma(j)} / log2(1 + j).
// All-zero relevance returns 1 by convention; k is clamped to the list
// length.
double ndcg_at_k(const Ranking& sigma, const Vec& rel, int k);

// Exact policy expectation sum_l theta_l * NDCG@k(sigma_l) (thetas
// normalized), not an estimate from the marginal matrix.
double expected_ndcg_at_k(const RankingDecomposition& d, const Vec& rel, int k);

// Draws sigma_l with probability theta_l / sum(theta).
const Ranking& sample_ranking(const RankingDecomposition& d, RngStream& rng);

struct StochasticPolicy {
    std::string qid;
    std::string method;
    Provenance provenance = Provenance::Solved;
    RankingDecomposition decomposition;
};

struct SequenceConfig {
    std::int64_t length = 10000;  // total impressions, >= number of queries
    std::uint64_t seed = 42;
    double attention_base = 2.0;

    void validate() const;
};

// Impressions per query: one guaranteed impression each, the remainder
// split proportionally to frequency with largest-remainder rounding.
std::vector<std::int64_t> stream_counts(const std::vector<std::int64_t>& frequencies,
                                        std::int64_t length);

struct QueryEvaluation {
    std::string qid;
    std::string method;
    std::int64_t impressions = 0;
    bool fallback = false;
    bool zero_relevance = false;

    // analytic expectations under the policy
    double ndcg5 = 0, ndcg10 = 0, outliers10 = 0, outlierness10 = 0;
    std::optional<double> dtr_value;

    // empirical means over the sampled impressions
    double emp_ndcg5 = 0, emp_ndcg10 = 0, emp_outliers10 = 0, emp_outlierness10 = 0;
    std::optional<double> emp_dtr;

    // empirical standard errors (delta method for the dTR ratio)
    double se_ndcg5 = 0, se_ndcg10 = 0, se_outliers10 = 0, se_outlierness10 = 0;
    std::optional<double> se_dtr;
};

struct Aggregates {
    double ndcg5 = 0, ndcg10 = 0, outliers10 = 0, outlierness10 = 0;
    std::optional<double> dtr_value;  // over queries where dTR is defined
};

struct MetricsReport {
    std::vector<QueryEvaluation> rows;  // sorted by qid
    std::string method;
    std::int64_t sequence_length = 0;
    std::uint64_t seed = 0;
    std::int64_t fallback_count = 0;
    double fallback_rate = 0.0;
    int zero_relevance_queries = 0;
    Aggregates analytic;   // impression-weighted means of the analytic rows
    Aggregates empirical;  // same weights over the empirical rows
};

// Simulates the impression stream and reports per-query analytic
// expectations next to their empirical stream means. Impression substreams
// are keyed by (seed, qid, impression index), so any sharding of the work
// reproduces the same bytes. Policies and outlier vectors are keyed by qid
// and must cover every query in the corpus.
MetricsReport evaluate_query_sequence(const Corpus& corpus,
                                      const std::map<std::string, StochasticPolicy>& policies,
                                      const std::map<std::string, OutlierVector>& outliers,
                                      const SequenceConfig& cfg);

}  // namespace omit
