#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace omit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Thrown when an input file or in-memory structure violates the data
// contract (bad field, duplicate id, malformed line, ...).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when an internal invariant breaks; indicates a bug, not bad input.
struct InternalError : std::logic_error {
    using std::logic_error::logic_error;
};

enum class Group { Dis, Priv };

inline const char* to_string(Group g) { return g == Group::Dis ? "dis" : "priv"; }

struct Item {
    std::string id;
    double utility = 0.0;    // ranking score the base ranker produced
    double relevance = 0.0;  // graded relevance; defaults to utility when absent
    Group group = Group::Priv;
    std::vector<double> features;
};

struct QueryInstance {
    std::string qid;
    std::int64_t frequency = 1;
    std::vector<Item> items;

    int size() const { return static_cast<int>(items.size()); }

    Vec utilities() const {
        Vec u(items.size());
        for (size_t i = 0; i < items.size(); ++i) u[i] = items[i].utility;
        return u;
    }
    Vec relevances() const {
        Vec r(items.size());
        for (size_t i = 0; i < items.size(); ++i) r[i] = items[i].relevance;
        return r;
    }
};

struct Corpus {
    std::vector<QueryInstance> queries;
};

// Permutation of item indices; order[p] is the item shown at position p
// (0-based in memory, 1-based in file formats and docs). Decompositions of
// rectangular matrices produce prefix rankings with order.size() < N.
struct Ranking {
    std::vector<int> order;

    int size() const { return static_cast<int>(order.size()); }
    bool operator==(const Ranking&) const = default;
};

// True iff r places each of 0..n-1 exactly once.
bool is_permutation(const Ranking& r, int n);

// True iff r is injective into 0..n-1 (prefix of a permutation).
bool is_partial_permutation(const Ranking& r, int n);

void validate_query(const QueryInstance& q);
void validate_corpus(const Corpus& c);

struct SyntheticConfig {
    int num_queries = 200;
    int items_per_query = 20;
    double outlier_fraction = 0.1;          // ceil(fraction*N) items get scaled features
    double outlier_magnitude = 50.0;        // feature scale factor, > 1
    double outlier_relevant_fraction = 0.1; // share of planted outliers that are genuinely relevant
    double group_balance = 0.5;             // P(item is in the disadvantaged group)
    std::uint64_t seed = 42;

    void validate() const;
};

}  // namespace omit
