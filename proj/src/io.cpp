#include "omit/io.hpp"

#include <cstdio>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "omit/corpus.hpp"

namespace omit {

using json = nlohmann::ordered_json;

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path + " for writing");
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    return in;
}

void finish(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw DataError("write failed: " + path);
}

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

json parse_line(const std::string& line, const std::string& path, int lineno) {
    try {
        return json::parse(line);
    } catch (const json::exception& e) {
        throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
}

}  // namespace

void save_outliers(const std::string& path, const Corpus& corpus,
                   const std::vector<OutlierVector>& vectors) {
    if (vectors.size() != corpus.queries.size())
        throw DataError("outlier vectors do not cover the corpus");
    std::ofstream out = open_out(path);
    for (size_t i = 0; i < vectors.size(); ++i) {
        json j;
        j["qid"] = corpus.queries[i].qid;
        j["scores"] = std::vector<double>(vectors[i].scores.data(),
                                          vectors[i].scores.data() + vectors[i].scores.size());
        j["binary"] = std::vector<int>(vectors[i].binary.data(),
                                       vectors[i].binary.data() + vectors[i].binary.size());
        out << j.dump() << '\n';
    }
    finish(out, path);
}

std::map<std::string, OutlierVector> load_outliers(const std::string& path) {
    std::ifstream in = open_in(path);
    std::map<std::string, OutlierVector> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const json j = parse_line(line, path, lineno);
        try {
            const std::string qid = j.at("qid").get<std::string>();
            OutlierVector v;
            const auto scores = j.at("scores").get<std::vector<double>>();
            const auto binary = j.at("binary").get<std::vector<int>>();
            if (scores.size() != binary.size())
                throw DataError("scores/binary length mismatch for query \"" + qid + "\"");
            v.scores = Eigen::Map<const Vec>(scores.data(), scores.size());
            v.binary.resize(binary.size());
            for (size_t i = 0; i < binary.size(); ++i) {
                if (binary[i] != 0 && binary[i] != 1)
                    throw DataError("binary entries must be 0/1 for query \"" + qid + "\"");
                v.binary[i] = binary[i];
            }
            if (!out.emplace(qid, std::move(v)).second)
                throw DataError("duplicate qid \"" + qid + "\"");
        } catch (const json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (out.empty()) throw DataError(path + ": no outlier vectors");
    return out;
}

void save_position_histogram(const std::string& path, const Corpus& corpus,
                             const std::vector<OutlierVector>& vectors) {
    if (vectors.size() != corpus.queries.size())
        throw DataError("outlier vectors do not cover the corpus");
    int max_n = 0;
    for (const auto& q : corpus.queries) max_n = std::max(max_n, q.size());
    std::vector<std::int64_t> counts(max_n, 0);
    for (size_t i = 0; i < corpus.queries.size(); ++i) {
        const Ranking initial = sort_by_utility(corpus.queries[i]);
        for (int pos = 0; pos < initial.size(); ++pos)
            if (vectors[i].binary[initial.order[pos]]) ++counts[pos];
    }
    std::ofstream out = open_out(path);
    out << "position,count\n";
    for (int pos = 0; pos < max_n; ++pos) out << (pos + 1) << ',' << counts[pos] << '\n';
    finish(out, path);
}

void save_policies(const std::string& path, const std::vector<StochasticPolicy>& policies) {
    std::ofstream out = open_out(path);
    for (const auto& p : policies) {
        json j;
        j["qid"] = p.qid;
        j["method"] = p.method;
        j["provenance"] = to_string(p.provenance);
        json terms = json::array();
        for (const auto& t : p.decomposition.terms) {
            json tj;
            tj["theta"] = t.theta;
            std::vector<int> order;
            order.reserve(t.sigma.order.size());
            for (int idx : t.sigma.order) order.push_back(idx + 1);  // 1-based on disk
            tj["order"] = order;
            terms.push_back(std::move(tj));
        }
        j["terms"] = std::move(terms);
        out << j.dump() << '\n';
    }
    finish(out, path);
}

std::vector<StochasticPolicy> load_policies(const std::string& path) {
    std::ifstream in = open_in(path);
    std::vector<StochasticPolicy> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const json j = parse_line(line, path, lineno);
        try {
            StochasticPolicy p;
            p.qid = j.at("qid").get<std::string>();
            p.method = j.at("method").get<std::string>();
            const std::string prov = j.at("provenance").get<std::string>();
            if (prov == "Solved") p.provenance = Provenance::Solved;
            else if (prov == "FallbackInitial") p.provenance = Provenance::FallbackInitial;
            else throw DataError("unknown provenance \"" + prov + "\"");
            for (const auto& tj : j.at("terms")) {
                RankingDecomposition::Term t;
                t.theta = tj.at("theta").get<double>();
                if (!(t.theta > 0))
                    throw DataError("term weight must be positive for query \"" + p.qid + "\"");
                for (int idx : tj.at("order").get<std::vector<int>>())
                    t.sigma.order.push_back(idx - 1);
                p.decomposition.terms.push_back(std::move(t));
            }
            if (p.decomposition.terms.empty())
                throw DataError("policy for query \"" + p.qid + "\" has no terms");
            p.decomposition.residual = std::max(0.0, 1.0 - p.decomposition.total_weight());
            out.push_back(std::move(p));
        } catch (const json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (out.empty()) throw DataError(path + ": no policies");
    return out;
}

void save_rank_summary(const std::string& path, const RankSummary& s) {
    json j;
    j["method"] = s.method;
    j["queries"] = s.queries;
    j["fallback_count"] = s.fallback_count;
    j["fallback_rate"] = s.fallback_rate;
    j["fairness_unavailable"] = s.fairness_unavailable;
    j["all_flagged_warnings"] = s.all_flagged_warnings;
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
    finish(out, path);
}

void save_report_csv(const std::string& path, const MetricsReport& report) {
    std::ofstream out = open_out(path);
    out << "qid,method,ndcg@5,ndcg@10,dtr,outliers@10,outlierness@10,fallback\n";
    for (const auto& r : report.rows) {
        out << r.qid << ',' << r.method << ',' << num(r.ndcg5) << ',' << num(r.ndcg10) << ',';
        if (r.dtr_value) out << num(*r.dtr_value);
        out << ',' << num(r.outliers10) << ',' << num(r.outlierness10) << ','
            << (r.fallback ? 1 : 0) << '\n';
    }
    finish(out, path);
}

namespace {

json aggregates_json(const Aggregates& a) {
    json j;
    j["ndcg@5"] = a.ndcg5;
    j["ndcg@10"] = a.ndcg10;
    if (a.dtr_value) j["dtr"] = *a.dtr_value;
    else j["dtr"] = nullptr;
    j["outliers@10"] = a.outliers10;
    j["outlierness@10"] = a.outlierness10;
    return j;
}

// positive delta = improvement; sign convention flips for metrics that are
// being driven down
json delta_pct(double value, double base, bool maximized) {
    if (base == 0.0) return nullptr;
    const double d = maximized ? (value - base) / base : (base - value) / base;
    return 100.0 * d;
}

}  // namespace

void save_report_json(const std::string& path, const MetricsReport& report,
                      const std::optional<Aggregates>& baseline,
                      const std::string& baseline_path) {
    json j;
    j["method"] = report.method;
    j["sequence_length"] = report.sequence_length;
    j["seed"] = report.seed;
    j["queries"] = report.rows.size();
    j["fallback_count"] = report.fallback_count;
    j["fallback_rate"] = report.fallback_rate;
    j["zero_relevance_queries"] = report.zero_relevance_queries;
    j["aggregates"]["analytic"] = aggregates_json(report.analytic);
    j["aggregates"]["empirical"] = aggregates_json(report.empirical);
    if (baseline) {
        j["baseline"] = baseline_path;
        json d;
        d["ndcg@5"] = delta_pct(report.analytic.ndcg5, baseline->ndcg5, true);
        d["ndcg@10"] = delta_pct(report.analytic.ndcg10, baseline->ndcg10, true);
        if (report.analytic.dtr_value && baseline->dtr_value)
            d["dtr"] = delta_pct(*report.analytic.dtr_value, *baseline->dtr_value, true);
        else
            d["dtr"] = nullptr;
        d["outliers@10"] = delta_pct(report.analytic.outliers10, baseline->outliers10, false);
        d["outlierness@10"] =
            delta_pct(report.analytic.outlierness10, baseline->outlierness10, false);
        j["deltas_pct"] = std::move(d);
    }
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
    finish(out, path);
}

Aggregates load_baseline_aggregates(const std::string& path) {
    std::ifstream in = open_in(path);
    json j;
    try {
        in >> j;
        const json& a = j.at("aggregates").at("analytic");
        Aggregates out;
        out.ndcg5 = a.at("ndcg@5").get<double>();
        out.ndcg10 = a.at("ndcg@10").get<double>();
        if (!a.at("dtr").is_null()) out.dtr_value = a.at("dtr").get<double>();
        out.outliers10 = a.at("outliers@10").get<double>();
        out.outlierness10 = a.at("outlierness@10").get<double>();
        return out;
    } catch (const json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
}

void save_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
    std::ofstream out = open_out(path);
    out << "param_value,ndcg@10,outlierness_improvement_pct\n";
    for (const auto& r : rows)
        out << num(r.param_value) << ',' << num(r.ndcg10) << ','
            << num(r.outlierness_improvement_pct) << '\n';
    finish(out, path);
}

}  // namespace omit
