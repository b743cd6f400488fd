#include "omit/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "omit/rng.hpp"

namespace omit {

using json = nlohmann::ordered_json;

bool is_permutation(const Ranking& r, int n) {
    if (r.size() != n) return false;
    return is_partial_permutation(r, n);
}

bool is_partial_permutation(const Ranking& r, int n) {
    if (r.size() > n) return false;
    std::vector<char> seen(n, 0);
    for (int i : r.order) {
        if (i < 0 || i >= n || seen[i]) return false;
        seen[i] = 1;
    }
    return true;
}

namespace {

void fail_query(const std::string& qid, const std::string& what) {
    throw DataError("query \"" + qid + "\": " + what);
}

}  // namespace

void validate_query(const QueryInstance& q) {
    if (q.qid.empty()) throw DataError("query with empty qid");
    if (q.frequency < 1) fail_query(q.qid, "field frequency must be >= 1");
    if (q.items.empty()) fail_query(q.qid, "field items must be non-empty");
    size_t dim = q.items.front().features.size();
    std::vector<std::string> ids;
    for (const Item& it : q.items) {
        if (it.id.empty()) fail_query(q.qid, "item with empty id");
        if (!std::isfinite(it.utility) || it.utility < 0)
            fail_query(q.qid, "field utility of item \"" + it.id + "\" must be finite and >= 0");
        if (!std::isfinite(it.relevance) || it.relevance < 0)
            fail_query(q.qid, "field relevance of item \"" + it.id + "\" must be finite and >= 0");
        if (it.features.empty())
            fail_query(q.qid, "empty feature vector for item \"" + it.id + "\"");
        if (it.features.size() != dim)
            fail_query(q.qid, "field features of item \"" + it.id + "\" has inconsistent dimension");
        for (double f : it.features)
            if (!std::isfinite(f))
                fail_query(q.qid, "field features of item \"" + it.id + "\" must be finite");
        ids.push_back(it.id);
    }
    std::sort(ids.begin(), ids.end());
    const auto dup = std::adjacent_find(ids.begin(), ids.end());
    if (dup != ids.end()) fail_query(q.qid, "duplicate item id \"" + *dup + "\"");
}

void validate_corpus(const Corpus& c) {
    if (c.queries.empty()) throw DataError("corpus has no queries");
    std::vector<std::string> qids;
    for (const QueryInstance& q : c.queries) {
        validate_query(q);
        qids.push_back(q.qid);
    }
    std::sort(qids.begin(), qids.end());
    auto dup = std::adjacent_find(qids.begin(), qids.end());
    if (dup != qids.end()) throw DataError("duplicate qid \"" + *dup + "\"");
}

namespace {

Item parse_item(const json& j, const std::string& qid) {
    Item it;
    if (!j.contains("id") || !j["id"].is_string()) fail_query(qid, "item missing string field id");
    it.id = j["id"].get<std::string>();
    if (!j.contains("utility") || !j["utility"].is_number())
        fail_query(qid, "item \"" + it.id + "\" missing numeric field utility");
    it.utility = j["utility"].get<double>();
    it.relevance = j.contains("relevance") ? j["relevance"].get<double>() : it.utility;
    if (!j.contains("group") || !j["group"].is_string())
        fail_query(qid, "item \"" + it.id + "\" missing string field group");
    std::string g = j["group"].get<std::string>();
    if (g == "dis") it.group = Group::Dis;
    else if (g == "priv") it.group = Group::Priv;
    else fail_query(qid, "item \"" + it.id + "\" has unknown group \"" + g + "\"");
    if (!j.contains("features") || !j["features"].is_array())
        fail_query(qid, "item \"" + it.id + "\" missing array field features");
    for (const auto& f : j["features"]) it.features.push_back(f.get<double>());
    return it;
}

}  // namespace

Corpus load_corpus(std::istream& in, const std::string& origin) {
    Corpus c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
        try {
            QueryInstance q;
            if (!j.contains("qid") || !j["qid"].is_string())
                throw DataError("line missing string field qid");
            q.qid = j["qid"].get<std::string>();
            q.frequency = j.contains("frequency") ? j["frequency"].get<std::int64_t>() : 1;
            if (!j.contains("items") || !j["items"].is_array())
                fail_query(q.qid, "missing array field items");
            for (const auto& ij : j["items"]) q.items.push_back(parse_item(ij, q.qid));
            c.queries.push_back(std::move(q));
        } catch (const json::exception& e) {
            throw DataError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (c.queries.empty()) throw DataError(origin + ": empty corpus");
    validate_corpus(c);
    return c;
}

Corpus load_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    return load_corpus(in, path);
}

void save_corpus(const Corpus& c, std::ostream& out) {
    for (const QueryInstance& q : c.queries) {
        json j;
        j["qid"] = q.qid;
        j["frequency"] = q.frequency;
        json items = json::array();
        for (const Item& it : q.items) {
            json ij;
            ij["id"] = it.id;
            ij["utility"] = it.utility;
            ij["relevance"] = it.relevance;
            ij["group"] = to_string(it.group);
            ij["features"] = it.features;
            items.push_back(std::move(ij));
        }
        j["items"] = std::move(items);
        out << j.dump() << '\n';
    }
}

void save_corpus(const Corpus& c, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path + " for writing");
    save_corpus(c, out);
    if (!out) throw DataError("write failed: " + path);
}

Ranking sort_by_utility(const QueryInstance& q) {
    Ranking r;
    r.order.resize(q.items.size());
    for (size_t i = 0; i < q.items.size(); ++i) r.order[i] = static_cast<int>(i);
    std::sort(r.order.begin(), r.order.end(), [&](int a, int b) {
        if (q.items[a].utility != q.items[b].utility)
            return q.items[a].utility > q.items[b].utility;
        return q.items[a].id < q.items[b].id;
    });
    return r;
}

void SyntheticConfig::validate() const {
    if (num_queries < 1) throw DataError("num_queries must be >= 1");
    if (items_per_query < 1) throw DataError("items_per_query must be >= 1");
    if (outlier_fraction < 0 || outlier_fraction > 1)
        throw DataError("outlier_fraction must be in [0, 1]");
    if (outlier_magnitude <= 1) throw DataError("outlier_magnitude must be > 1");
    if (outlier_relevant_fraction < 0 || outlier_relevant_fraction > 1)
        throw DataError("outlier_relevant_fraction must be in [0, 1]");
    if (group_balance <= 0 || group_balance >= 1)
        throw DataError("group_balance must be in (0, 1)");
}

// Base feature values live in [kFeatureLow, kFeatureHigh]; planted outliers
// multiply them by outlier_magnitude, which puts them far outside the base
// range for any magnitude comfortably above 1.
namespace {
constexpr double kFeatureLow = 1.0;
constexpr double kFeatureHigh = 10.0;
}  // namespace

Corpus generate_synthetic(const SyntheticConfig& cfg) {
    cfg.validate();
    Corpus c;
    RngStream root(cfg.seed);
    const int n = cfg.items_per_query;
    const int planted = static_cast<int>(std::ceil(cfg.outlier_fraction * n));
    for (int qi = 0; qi < cfg.num_queries; ++qi) {
        // independent substream per query: generation order never matters
        RngStream rng = root.fork(static_cast<std::uint64_t>(qi));
        QueryInstance q;
        q.qid = "q" + std::string(5 - std::to_string(qi + 1).size(), '0') + std::to_string(qi + 1);
        q.frequency = 1 + static_cast<std::int64_t>(rng.next_below(20));

        std::vector<int> planted_idx;
        {
            std::vector<int> idx(n);
            for (int i = 0; i < n; ++i) idx[i] = i;
            for (int i = 0; i < planted; ++i) {
                int j = i + static_cast<int>(rng.next_below(n - i));
                std::swap(idx[i], idx[j]);
            }
            planted_idx.assign(idx.begin(), idx.begin() + planted);
        }
        std::vector<char> is_planted(n, 0);
        for (int i : planted_idx) is_planted[i] = 1;
        const int relevant_planted =
            static_cast<int>(std::lround(cfg.outlier_relevant_fraction * planted));
        std::vector<char> is_relevant_outlier(n, 0);
        for (int i = 0; i < relevant_planted; ++i) is_relevant_outlier[planted_idx[i]] = 1;

        for (int i = 0; i < n; ++i) {
            Item it;
            it.id = "d" + std::string(3 - std::to_string(i + 1).size(), '0') + std::to_string(i + 1);
            double feature = rng.next_double(kFeatureLow, kFeatureHigh);
            if (is_planted[i]) {
                feature *= cfg.outlier_magnitude;
                if (is_relevant_outlier[i]) {
                    // genuinely good result that happens to look anomalous
                    it.relevance = rng.next_double(0.8, 1.0);
                    it.utility = it.relevance;
                } else {
                    // clickbait shape: the ranker scores it high, users do not
                    it.relevance = rng.next_double(0.0, 0.1);
                    it.utility = std::min(1.0, it.relevance + rng.next_double(0.6, 0.9));
                }
            } else {
                it.relevance = rng.next_double(0.0, 1.0);
                it.utility = it.relevance;
            }
            it.group = rng.next_double() < cfg.group_balance ? Group::Dis : Group::Priv;
            it.features.push_back(feature);
            q.items.push_back(std::move(it));
        }
        c.queries.push_back(std::move(q));
    }
    validate_corpus(c);
    return c;
}

}  // namespace omit
