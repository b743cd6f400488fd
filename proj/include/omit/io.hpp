#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "omit/metrics.hpp"
#include "omit/outlier.hpp"
#include "omit/types.hpp"

namespace omit {

// All files are UTF-8 with LF line endings and a canonical key/row order,
// so identical inputs produce byte-identical outputs. Item indices inside
// files are 1-based.

// {"qid": ..., "scores": [...], "binary": [0|1, ...]} per line, corpus order.
void save_outliers(const std::string& path, const Corpus& corpus,
                   const std::vector<OutlierVector>& vectors);
std::map<std::string, OutlierVector> load_outliers(const std::string& path);

// CSV "position,count": how many flagged items sit at each position of the
// utility-sorted order, across the corpus.
void save_position_histogram(const std::string& path, const Corpus& corpus,
                             const std::vector<OutlierVector>& vectors);

// {"qid": ..., "method": ..., "provenance": "Solved"|"FallbackInitial",
//  "terms": [{"theta": t, "order": [1-based item indices]}, ...]} per line.
void save_policies(const std::string& path, const std::vector<StochasticPolicy>& policies);
std::vector<StochasticPolicy> load_policies(const std::string& path);

// Rank-stage summary (query/fallback counts) as JSON.
struct RankSummary {
    std::string method;
    std::int64_t queries = 0;
    std::int64_t fallback_count = 0;
    double fallback_rate = 0.0;
    int fairness_unavailable = 0;
    int all_flagged_warnings = 0;
};
void save_rank_summary(const std::string& path, const RankSummary& s);

// Per-query metrics CSV, header:
//   qid,method,ndcg@5,ndcg@10,dtr,outliers@10,outlierness@10,fallback
// dtr is empty when undefined for the query; fallback is 0/1.
void save_report_csv(const std::string& path, const MetricsReport& report);

// Aggregate summary. When `baseline` is given, carries percentage deltas
// against it: improvements are positive, i.e. (value-base)/base for scores
// being maximized (ndcg, dtr) and (base-value)/base for ones being
// minimized (outliers@10, outlierness@10).
void save_report_json(const std::string& path, const MetricsReport& report,
                      const std::optional<Aggregates>& baseline = std::nullopt,
                      const std::string& baseline_path = "");

// Reads the "analytic" aggregates back from a summary written above.
Aggregates load_baseline_aggregates(const std::string& path);

struct SweepRow {
    double param_value = 0.0;
    double ndcg10 = 0.0;
    double outlierness_improvement_pct = 0.0;
};
// CSV "param_value,ndcg@10,outlierness_improvement_pct".
void save_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

}  // namespace omit
