#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "omit/corpus.hpp"
#include "omit/io.hpp"
#include "omit/metrics.hpp"
#include "omit/outlier.hpp"
#include "omit/pipeline.hpp"

namespace fs = std::filesystem;
using namespace omit;

namespace {

struct DetectorFlags {
    std::string method = "copod";
    int context_n = 0;  // 0 = whole list
    double mad_threshold = 3.5;
    int knn_k = 5;
    double contamination = 0.1;
    bool no_normalize = false;
    bool no_copod_skew = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--detector", method, "outlier detector: mad|medknn|copod")
            ->check(CLI::IsMember({"mad", "medknn", "copod"}))
            ->capture_default_str();
        cmd->add_option("--context-n", context_n,
                        "detection context size (0 = whole list)")
            ->check(CLI::NonNegativeNumber)
            ->capture_default_str();
        cmd->add_option("--mad-threshold", mad_threshold, "modified Z-score cut")
            ->capture_default_str();
        cmd->add_option("--knn-k", knn_k, "neighbours for medknn")->capture_default_str();
        cmd->add_option("--contamination", contamination,
                        "flag quantile for medknn/copod")
            ->check(CLI::Range(1e-9, 0.5))
            ->capture_default_str();
        cmd->add_flag("--no-normalize", no_normalize, "keep raw flagged scores");
        cmd->add_flag("--no-copod-skew", no_copod_skew, "disable copod skew correction");
    }

    DetectorConfig build() const {
        DetectorConfig cfg;
        cfg.method = detector_method_from_string(method);
        cfg.context_n = context_n;
        cfg.mad_threshold = mad_threshold;
        cfg.knn_k = knn_k;
        cfg.contamination = contamination;
        cfg.normalize = !no_normalize;
        cfg.copod_skew_correction = !no_copod_skew;
        return cfg;
    }
};

std::optional<FairnessVariant> parse_fairness(const std::string& s) {
    if (s == "dtr-exact") return FairnessVariant::DtrExact;
    if (s == "size-normalized") return FairnessVariant::SizeNormalized;
    if (s == "none") return std::nullopt;
    throw DataError("unknown fairness variant \"" + s + "\"");
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create directory " + dir + ": " + ec.message());
}

std::map<std::string, OutlierVector> outlier_map(const Corpus& corpus,
                                                 const std::vector<OutlierVector>& vecs) {
    std::map<std::string, OutlierVector> m;
    for (size_t i = 0; i < corpus.queries.size(); ++i)
        m.emplace(corpus.queries[i].qid, vecs[i]);
    return m;
}

std::map<std::string, StochasticPolicy> policy_map(const std::vector<StochasticPolicy>& ps) {
    std::map<std::string, StochasticPolicy> m;
    for (const auto& p : ps)
        if (!m.emplace(p.qid, p).second) throw DataError("duplicate policy for qid " + p.qid);
    return m;
}

// --- gen ---------------------------------------------------------------

void cmd_gen(const SyntheticConfig& cfg, const std::string& out) {
    const Corpus c = generate_synthetic(cfg);
    save_corpus(c, out);
    std::cout << "wrote " << c.queries.size() << " queries to " << out << "\n";
}

// --- detect ------------------------------------------------------------

void cmd_detect(const std::string& input, const std::string& out_dir,
                const DetectorFlags& df, int threads) {
    const Corpus corpus = load_corpus(input);
    const std::vector<OutlierVector> vecs = detect_corpus(corpus, df.build(), threads);
    ensure_dir(out_dir);
    const std::string out_jsonl = (fs::path(out_dir) / "outliers.jsonl").string();
    const std::string out_csv = (fs::path(out_dir) / "outlier_positions.csv").string();
    save_outliers(out_jsonl, corpus, vecs);
    save_position_histogram(out_csv, corpus, vecs);
    std::int64_t flagged = 0;
    for (const auto& v : vecs) flagged += v.binary.sum();
    std::cout << "flagged " << flagged << " items across " << corpus.queries.size()
              << " queries\nwrote " << out_jsonl << "\nwrote " << out_csv << "\n";
}

// --- rank --------------------------------------------------------------

void cmd_rank(const std::string& input, const std::string& out_dir, const std::string& method,
              const std::string& outliers_path, const DetectorFlags& df,
              const std::string& fairness, int top_k, double attention_base, double lambda_o,
              double lambda_s, int threads) {
    const Corpus corpus = load_corpus(input);
    RunConfig cfg;
    cfg.method = method_from_string(method);
    cfg.detector = df.build();
    cfg.top_k = top_k;
    cfg.attention_base = attention_base;
    cfg.lambda_o = lambda_o;
    cfg.lambda_s = lambda_s;
    cfg.fairness = parse_fairness(fairness);
    cfg.threads = threads;

    std::vector<OutlierVector> vecs;
    bool computed_here = false;
    if (!outliers_path.empty()) {
        auto loaded = load_outliers(outliers_path);
        for (const auto& q : corpus.queries) {
            auto it = loaded.find(q.qid);
            if (it == loaded.end())
                throw DataError(outliers_path + " has no entry for query \"" + q.qid + "\"");
            if (it->second.size() != q.size())
                throw DataError("outlier vector size mismatch for query \"" + q.qid + "\"");
            vecs.push_back(it->second);
        }
    } else if (method_needs_outliers(cfg.method)) {
        vecs = detect_corpus(corpus, cfg.detector, threads);
        computed_here = true;
    } else {
        vecs = zero_outliers(corpus);
    }

    const RankOutput out = run_rank_pipeline(corpus, vecs, cfg);
    ensure_dir(out_dir);
    const std::string policies_path = (fs::path(out_dir) / "policies.jsonl").string();
    save_policies(policies_path, out.policies);
    if (computed_here)
        save_outliers((fs::path(out_dir) / "outliers_used.jsonl").string(), corpus, vecs);

    RankSummary summary;
    summary.method = method;
    summary.queries = static_cast<std::int64_t>(corpus.queries.size());
    summary.fallback_count = out.fallback_count;
    summary.fallback_rate =
        static_cast<double>(out.fallback_count) / static_cast<double>(corpus.queries.size());
    summary.fairness_unavailable = out.fairness_unavailable;
    summary.all_flagged_warnings = out.all_flagged_warnings;
    const std::string summary_path = (fs::path(out_dir) / "rank_summary.json").string();
    save_rank_summary(summary_path, summary);
    std::cout << "ranked " << summary.queries << " queries (" << summary.fallback_count
              << " fallbacks)\nwrote " << policies_path << "\nwrote " << summary_path << "\n";
}

// --- eval --------------------------------------------------------------

void cmd_eval(const std::string& input, const std::string& policies_path,
              const std::string& outliers_path, const std::string& out_dir,
              std::int64_t sequence_length, std::uint64_t seed, double attention_base,
              const std::string& baseline_path) {
    const Corpus corpus = load_corpus(input);
    const auto policies = policy_map(load_policies(policies_path));
    const auto outliers = load_outliers(outliers_path);

    SequenceConfig cfg;
    cfg.length = sequence_length;
    cfg.seed = seed;
    cfg.attention_base = attention_base;
    const MetricsReport report = evaluate_query_sequence(corpus, policies, outliers, cfg);

    std::optional<Aggregates> baseline;
    if (!baseline_path.empty()) baseline = load_baseline_aggregates(baseline_path);

    ensure_dir(out_dir);
    const std::string csv_path = (fs::path(out_dir) / "metrics.csv").string();
    const std::string json_path = (fs::path(out_dir) / "metrics_summary.json").string();
    save_report_csv(csv_path, report);
    save_report_json(json_path, report, baseline, baseline_path);
    std::cout << "evaluated " << report.rows.size() << " queries over " << report.sequence_length
              << " impressions\nwrote " << csv_path << "\nwrote " << json_path << "\n";
}

// --- sweep -------------------------------------------------------------

void cmd_sweep(const std::string& input, const std::string& out_dir, const std::string& param,
               const std::vector<int>& values, const std::string& method,
               const DetectorFlags& df, const std::string& fairness, int top_k,
               double attention_base, double lambda_o, double lambda_s,
               std::int64_t sequence_length, std::uint64_t seed, int threads) {
    if (values.empty()) throw DataError("sweep needs at least one value");
    const Corpus corpus = load_corpus(input);
    std::vector<SweepRow> rows;
    for (int value : values) {
        DetectorFlags dfv = df;
        int k = top_k;
        if (param == "context-n") dfv.context_n = value;
        else k = value;

        const std::vector<OutlierVector> vecs = detect_corpus(corpus, dfv.build(), threads);
        const auto ov_map = outlier_map(corpus, vecs);

        RunConfig rc;
        rc.method = method_from_string(method);
        rc.detector = dfv.build();
        rc.top_k = k;
        rc.attention_base = attention_base;
        rc.lambda_o = lambda_o;
        rc.lambda_s = lambda_s;
        rc.fairness = parse_fairness(fairness);
        rc.threads = threads;
        const RankOutput ranked = run_rank_pipeline(corpus, vecs, rc);

        RunConfig base_rc = rc;
        base_rc.method = Method::Utility;
        const RankOutput base_ranked = run_rank_pipeline(corpus, vecs, base_rc);

        SequenceConfig sc;
        sc.length = sequence_length;
        sc.seed = seed;
        sc.attention_base = attention_base;
        const MetricsReport mr =
            evaluate_query_sequence(corpus, policy_map(ranked.policies), ov_map, sc);
        const MetricsReport base =
            evaluate_query_sequence(corpus, policy_map(base_ranked.policies), ov_map, sc);

        SweepRow row;
        row.param_value = value;
        row.ndcg10 = mr.analytic.ndcg10;
        row.outlierness_improvement_pct =
            base.analytic.outlierness10 > 0
                ? 100.0 * (base.analytic.outlierness10 - mr.analytic.outlierness10) /
                      base.analytic.outlierness10
                : 0.0;
        rows.push_back(row);
        std::cout << param << "=" << value << ": ndcg@10 " << row.ndcg10
                  << ", outlierness improvement " << row.outlierness_improvement_pct << "%\n";
    }
    ensure_dir(out_dir);
    const std::string csv_path = (fs::path(out_dir) / "sweep.csv").string();
    save_sweep_csv(csv_path, rows);
    std::cout << "wrote " << csv_path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fair stochastic re-ranking with top-k outlier suppression"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic corpus");
    SyntheticConfig gen_cfg;
    std::string gen_out;
    gen->add_option("--out", gen_out, "output corpus path (jsonl)")->required();
    gen->add_option("--queries", gen_cfg.num_queries)
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    gen->add_option("--items", gen_cfg.items_per_query)
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    gen->add_option("--outlier-fraction", gen_cfg.outlier_fraction)
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    gen->add_option("--outlier-magnitude", gen_cfg.outlier_magnitude)
        ->check(CLI::Range(1.0 + 1e-9, 1e9))
        ->capture_default_str();
    gen->add_option("--outlier-relevant-fraction", gen_cfg.outlier_relevant_fraction)
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    gen->add_option("--group-balance", gen_cfg.group_balance)
        ->check(CLI::Range(1e-9, 1.0 - 1e-9))
        ->capture_default_str();
    gen->add_option("--seed", gen_cfg.seed)->capture_default_str();
    gen->callback([&] { cmd_gen(gen_cfg, gen_out); });

    // detect
    auto* det = app.add_subcommand("detect", "score and flag outlier items");
    std::string det_input, det_out_dir;
    DetectorFlags det_flags;
    int det_threads = 0;
    det->add_option("--input", det_input, "corpus jsonl")->required();
    det->add_option("--out-dir", det_out_dir, "output directory")->required();
    det_flags.attach(det);
    det->add_option("--threads", det_threads, "worker threads (0 = auto)")
        ->capture_default_str();
    det->callback([&] { cmd_detect(det_input, det_out_dir, det_flags, det_threads); });

    // rank
    auto* rank = app.add_subcommand("rank", "build stochastic ranking policies");
    std::string rank_input, rank_out_dir, rank_method = "omit-soft", rank_outliers;
    std::string rank_fairness = "dtr-exact";
    DetectorFlags rank_flags;
    int rank_top_k = 10, rank_threads = 0;
    double rank_base = 2.0, rank_lambda_o = 1.0, rank_lambda_s = 10.0;
    rank->add_option("--input", rank_input, "corpus jsonl")->required();
    rank->add_option("--out-dir", rank_out_dir, "output directory")->required();
    rank->add_option("--method", rank_method,
                     "utility|foe-hard|foe-soft|ro|omit-hard|omit-soft")
        ->check(CLI::IsMember({"utility", "foe-hard", "foe-soft", "ro", "omit-hard",
                               "omit-soft"}))
        ->capture_default_str();
    rank->add_option("--outliers", rank_outliers,
                     "precomputed outlier vectors (jsonl); detected on the fly otherwise");
    rank_flags.attach(rank);
    rank->add_option("--top-k", rank_top_k, "positions penalized for outlierness")
        ->capture_default_str();
    rank->add_option("--attention-base", rank_base)->capture_default_str();
    rank->add_option("--lambda-o", rank_lambda_o, "outlierness penalty weight")
        ->capture_default_str();
    rank->add_option("--lambda-s", rank_lambda_s, "soft-mode slack penalty")
        ->capture_default_str();
    rank->add_option("--fairness", rank_fairness, "dtr-exact|size-normalized|none")
        ->check(CLI::IsMember({"dtr-exact", "size-normalized", "none"}))
        ->capture_default_str();
    rank->add_option("--threads", rank_threads, "worker threads (0 = auto)")
        ->capture_default_str();
    rank->callback([&] {
        cmd_rank(rank_input, rank_out_dir, rank_method, rank_outliers, rank_flags,
                 rank_fairness, rank_top_k, rank_base, rank_lambda_o, rank_lambda_s,
                 rank_threads);
    });

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate policies over a query stream");
    std::string eval_input, eval_policies, eval_outliers, eval_out_dir, eval_baseline;
    std::int64_t eval_len = 10000;
    std::uint64_t eval_seed = 42;
    double eval_base = 2.0;
    eval->add_option("--input", eval_input, "corpus jsonl")->required();
    eval->add_option("--policies", eval_policies, "policies jsonl")->required();
    eval->add_option("--outliers", eval_outliers, "outlier vectors jsonl")->required();
    eval->add_option("--out-dir", eval_out_dir, "output directory")->required();
    eval->add_option("--sequence-length", eval_len, "total impressions")->capture_default_str();
    eval->add_option("--seed", eval_seed)->capture_default_str();
    eval->add_option("--attention-base", eval_base)->capture_default_str();
    eval->add_option("--baseline", eval_baseline,
                     "metrics_summary.json of a baseline run; adds percentage deltas");
    eval->callback([&] {
        cmd_eval(eval_input, eval_policies, eval_outliers, eval_out_dir, eval_len, eval_seed,
                 eval_base, eval_baseline);
    });

    // sweep
    auto* sweep = app.add_subcommand("sweep", "rerun the pipeline across a parameter range");
    std::string sw_input, sw_out_dir, sw_param, sw_method = "omit-soft";
    std::string sw_fairness = "dtr-exact";
    std::vector<int> sw_values;
    DetectorFlags sw_flags;
    int sw_top_k = 10, sw_threads = 0;
    double sw_base = 2.0, sw_lambda_o = 1.0, sw_lambda_s = 10.0;
    std::int64_t sw_len = 10000;
    std::uint64_t sw_seed = 42;
    sweep->add_option("--input", sw_input, "corpus jsonl")->required();
    sweep->add_option("--out-dir", sw_out_dir, "output directory")->required();
    sweep->add_option("--param", sw_param, "context-n|top-k")
        ->check(CLI::IsMember({"context-n", "top-k"}))
        ->required();
    sweep->add_option("--values", sw_values, "parameter values")->required()->delimiter(',');
    sweep->add_option("--method", sw_method)
        ->check(CLI::IsMember({"utility", "foe-hard", "foe-soft", "ro", "omit-hard",
                               "omit-soft"}))
        ->capture_default_str();
    sw_flags.attach(sweep);
    sweep->add_option("--top-k", sw_top_k)->capture_default_str();
    sweep->add_option("--attention-base", sw_base)->capture_default_str();
    sweep->add_option("--lambda-o", sw_lambda_o)->capture_default_str();
    sweep->add_option("--lambda-s", sw_lambda_s)->capture_default_str();
    sweep->add_option("--fairness", sw_fairness)
        ->check(CLI::IsMember({"dtr-exact", "size-normalized", "none"}))
        ->capture_default_str();
    sweep->add_option("--sequence-length", sw_len)->capture_default_str();
    sweep->add_option("--seed", sw_seed)->capture_default_str();
    sweep->add_option("--threads", sw_threads)->capture_default_str();
    sweep->callback([&] {
        cmd_sweep(sw_input, sw_out_dir, sw_param, sw_values, sw_method, sw_flags, sw_fairness,
                  sw_top_k, sw_base, sw_lambda_o, sw_lambda_s, sw_len, sw_seed, sw_threads);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;  // --help exits 0, usage errors exit 1
    } catch (const InternalError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
