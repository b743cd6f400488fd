#include "omit/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>

#include "omit/stochastic.hpp"

namespace omit {

const char* to_string(Method m) {
    switch (m) {
        case Method::Utility: return "utility";
        case Method::FoeHard: return "foe-hard";
        case Method::FoeSoft: return "foe-soft";
        case Method::RO: return "ro";
        case Method::OmitHard: return "omit-hard";
        case Method::OmitSoft: return "omit-soft";
    }
    throw InternalError("unknown method");
}

Method method_from_string(const std::string& s) {
    if (s == "utility") return Method::Utility;
    if (s == "foe-hard") return Method::FoeHard;
    if (s == "foe-soft") return Method::FoeSoft;
    if (s == "ro") return Method::RO;
    if (s == "omit-hard") return Method::OmitHard;
    if (s == "omit-soft") return Method::OmitSoft;
    throw DataError("unknown method \"" + s + "\"");
}

bool method_needs_outliers(Method m) {
    return m == Method::RO || m == Method::OmitHard || m == Method::OmitSoft;
}

bool method_uses_lp(Method m) {
    return m == Method::FoeHard || m == Method::FoeSoft || m == Method::OmitHard ||
           m == Method::OmitSoft;
}

void RunConfig::validate() const {
    detector.validate();
    if (top_k < 1) throw DataError("top_k must be >= 1");
    if (attention_base <= 1) throw DataError("attention_base must be > 1");
    if (lambda_o < 0) throw DataError("lambda_o must be >= 0");
    if (lambda_s < 0) throw DataError("lambda_s must be >= 0");
    if (threads < 0) throw DataError("threads must be >= 0");
}

int resolve_threads(int requested) {
    int t = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    if (t < 1) t = 1;
    if (const char* cap = std::getenv("OMIT_RANK_THREADS")) {
        const int c = std::atoi(cap);
        if (c >= 1) t = std::min(t, c);
    }
    return t;
}

namespace {

// runs fn(i) for i in [0, n) on `threads` workers; exceptions resurface
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (;;) {
                    const int i = next.fetch_add(1);
                    if (i >= n) return;
                    fn(i);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace

std::vector<OutlierVector> detect_corpus(const Corpus& corpus, const DetectorConfig& cfg,
                                         int threads) {
    cfg.validate();
    std::vector<OutlierVector> out(corpus.queries.size());
    parallel_for(static_cast<int>(corpus.queries.size()), resolve_threads(threads), [&](int i) {
        const QueryInstance& q = corpus.queries[i];
        out[i] = detect(q, sort_by_utility(q), cfg);
    });
    return out;
}

std::vector<OutlierVector> zero_outliers(const Corpus& corpus) {
    std::vector<OutlierVector> out(corpus.queries.size());
    for (size_t i = 0; i < corpus.queries.size(); ++i) {
        const int n = corpus.queries[i].size();
        out[i].scores = Vec::Zero(n);
        out[i].binary = Eigen::VectorXi::Zero(n);
    }
    return out;
}

namespace {

RankingDecomposition single_term(Ranking r) {
    RankingDecomposition d;
    d.terms.push_back({1.0, std::move(r)});
    d.residual = 0.0;
    return d;
}

struct QueryResult {
    StochasticPolicy policy;
    bool fallback = false;
    bool fairness_unavailable = false;
    bool all_flagged = false;
};

QueryResult rank_one(const QueryInstance& q, const OutlierVector& ov, const RunConfig& cfg) {
    QueryResult res;
    res.policy.qid = q.qid;
    res.policy.method = to_string(cfg.method);
    res.policy.provenance = Provenance::Solved;
    const Ranking initial = sort_by_utility(q);

    switch (cfg.method) {
        case Method::Utility:
            res.policy.decomposition = single_term(initial);
            return res;
        case Method::RO: {
            const RemoveOutliersResult r = remove_outliers_baseline(initial, ov.binary);
            res.all_flagged = r.all_flagged;
            res.policy.decomposition = single_term(r.ranking);
            return res;
        }
        default: break;
    }

    const int n = q.size();
    FairRankProblem prob;
    prob.u = q.utilities();
    prob.v = attention_vector(n, cfg.attention_base);
    prob.o = ov.scores;
    prob.h = top_k_mask(n, cfg.top_k);
    prob.mode = (cfg.method == Method::FoeHard || cfg.method == Method::OmitHard)
                    ? ConstraintMode::Hard
                    : ConstraintMode::Soft;
    prob.lambda_o = cfg.lambda_o;
    prob.lambda_s = cfg.lambda_s;
    if (cfg.fairness) {
        try {
            prob.f = fairness_vector(q, *cfg.fairness);
        } catch (const FairnessUnavailable&) {
            res.fairness_unavailable = true;  // constraint dropped, run stays usable
        }
    }

    const bool foe = cfg.method == Method::FoeHard || cfg.method == Method::FoeSoft;
    const MarginalRankMatrix m =
        foe ? solve_foe(prob, initial) : solve_omit(prob, initial);
    res.fallback = m.provenance == Provenance::FallbackInitial;
    res.policy.provenance = m.provenance;
    res.policy.decomposition =
        res.fallback ? single_term(initial) : decompose(m.P);
    return res;
}

}  // namespace

RankOutput run_rank_pipeline(const Corpus& corpus, const std::vector<OutlierVector>& outliers,
                             const RunConfig& cfg) {
    cfg.validate();
    if (outliers.size() != corpus.queries.size())
        throw DataError("outlier vectors do not cover the corpus");

    std::vector<QueryResult> results(corpus.queries.size());
    parallel_for(static_cast<int>(corpus.queries.size()), resolve_threads(cfg.threads),
                 [&](int i) { results[i] = rank_one(corpus.queries[i], outliers[i], cfg); });

    RankOutput out;
    for (auto& r : results) {
        out.fallback_count += r.fallback ? 1 : 0;
        out.fairness_unavailable += r.fairness_unavailable ? 1 : 0;
        out.all_flagged_warnings += r.all_flagged ? 1 : 0;
        out.policies.push_back(std::move(r.policy));
    }
    std::sort(out.policies.begin(), out.policies.end(),
              [](const auto& a, const auto& b) { return a.qid < b.qid; });
    return out;
}

}  // namespace omit
