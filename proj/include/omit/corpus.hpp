#pragma once

#include <iosfwd>
#include <string>

#include "omit/types.hpp"

namespace omit {

// JSONL, one query per line:
//   {"qid": "...", "frequency": n, "items": [{"id", "utility",
//    "relevance"?, "group": "dis"|"priv", "features": [...]}, ...]}
// Errors carry the 1-based line number; invariant violations name the qid
// and offending field.
Corpus load_corpus(const std::string& path);
Corpus load_corpus(std::istream& in, const std::string& origin);

// Writes UTF-8, LF line endings. load(save(c)) == c for validated corpora.
void save_corpus(const Corpus& c, const std::string& path);
void save_corpus(const Corpus& c, std::ostream& out);

// Deterministic production ranking: utility descending, item id ascending
// on ties.
Ranking sort_by_utility(const QueryInstance& q);

// Synthetic corpus shaped like the motivating production traces: planted
// outliers carry feature magnitudes far outside the base range and the
// irrelevant ones among them receive a utility boost so they crowd the top
// of the utility order.
Corpus generate_synthetic(const SyntheticConfig& cfg);

}  // namespace omit
