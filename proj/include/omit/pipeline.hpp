#pragma once

#include <map>
#include <string>
#include <vector>

#include "omit/corpus.hpp"
#include "omit/fair_rank.hpp"
#include "omit/metrics.hpp"
#include "omit/outlier.hpp"

namespace omit {

enum class Method { Utility, FoeHard, FoeSoft, RO, OmitHard, OmitSoft };

const char* to_string(Method m);
Method method_from_string(const std::string& s);

bool method_needs_outliers(Method m);  // ro / omit-*
bool method_uses_lp(Method m);         // foe-* / omit-*

struct RunConfig {
    Method method = Method::OmitSoft;
    DetectorConfig detector;
    int top_k = 10;              // clamped per query to the list length
    double attention_base = 2.0;
    double lambda_o = 1.0;
    double lambda_s = 10.0;
    std::optional<FairnessVariant> fairness = FairnessVariant::DtrExact;
    int threads = 0;             // 0 = hardware; OMIT_RANK_THREADS caps either way

    void validate() const;
};

// Worker count after applying cfg and the OMIT_RANK_THREADS cap; >= 1.
int resolve_threads(int requested);

// Runs detect() per query, in parallel. Output aligned with corpus order.
std::vector<OutlierVector> detect_corpus(const Corpus& corpus, const DetectorConfig& cfg,
                                         int threads = 0);

std::vector<OutlierVector> zero_outliers(const Corpus& corpus);

struct RankOutput {
    std::vector<StochasticPolicy> policies;  // sorted by qid
    std::int64_t fallback_count = 0;
    int fairness_unavailable = 0;  // queries ranked without the fairness constraint
    int all_flagged_warnings = 0;  // ro queries where every item was flagged
};

// Per-query ranking pipeline: initial utility order -> LP (or baseline)
// -> decomposition into an executable policy. `outliers` is aligned with
// corpus order (see detect_corpus / zero_outliers). Thread count never
// changes the output bytes; results are ordered by qid.
RankOutput run_rank_pipeline(const Corpus& corpus,
                             const std::vector<OutlierVector>& outliers,
                             const RunConfig& cfg);

}  // namespace omit
