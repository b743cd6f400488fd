#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "omit/corpus.hpp"
#include "omit/outlier.hpp"

using namespace omit;

namespace {

Corpus from_string(const std::string& jsonl) {
    std::istringstream in(jsonl);
    return load_corpus(in, "<test>");
}

std::string file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace

TEST_CASE("minimal single-item record parses") {
    const Corpus c = from_string(
        R"({"qid":"q1","frequency":1,"items":[{"id":"a","utility":1.0,"group":"priv","features":[3.0]}]})"
        "\n");
    REQUIRE(c.queries.size() == 1);
    const QueryInstance& q = c.queries[0];
    CHECK(q.qid == "q1");
    CHECK(q.frequency == 1);
    REQUIRE(q.size() == 1);
    CHECK(q.items[0].id == "a");
    CHECK(q.items[0].utility == 1.0);
    CHECK(q.items[0].relevance == 1.0);  // defaults to utility
    CHECK(q.items[0].group == Group::Priv);
    REQUIRE(q.items[0].features.size() == 1);
    CHECK(q.items[0].features[0] == 3.0);
}

TEST_CASE("duplicate item id is rejected with qid and id") {
    const std::string line =
        R"({"qid":"q9","frequency":1,"items":[)"
        R"({"id":"a","utility":1.0,"group":"priv","features":[1.0]},)"
        R"({"id":"a","utility":0.5,"group":"dis","features":[2.0]}]})"
        "\n";
    CHECK_THROWS_WITH_AS(from_string(line), doctest::Contains("q9"), DataError);
    CHECK_THROWS_WITH_AS(from_string(line), doctest::Contains("\"a\""), DataError);
}

TEST_CASE("empty feature vector is rejected") {
    const std::string line =
        R"({"qid":"q2","frequency":1,"items":[{"id":"a","utility":1.0,"group":"priv","features":[]}]})"
        "\n";
    CHECK_THROWS_WITH_AS(from_string(line), doctest::Contains("empty feature vector"),
                         DataError);
}

TEST_CASE("malformed json reports the line number") {
    const std::string text =
        R"({"qid":"q1","frequency":1,"items":[{"id":"a","utility":1.0,"group":"priv","features":[3.0]}]})"
        "\n{not json\n";
    CHECK_THROWS_WITH_AS(from_string(text), doctest::Contains(":2:"), DataError);
}

TEST_CASE("duplicate qids are rejected") {
    const std::string line =
        R"({"qid":"q1","frequency":1,"items":[{"id":"a","utility":1.0,"group":"priv","features":[3.0]}]})";
    CHECK_THROWS_AS(from_string(line + "\n" + line + "\n"), DataError);
}

TEST_CASE("unknown group label is rejected") {
    const std::string line =
        R"({"qid":"q1","frequency":1,"items":[{"id":"a","utility":1.0,"group":"other","features":[3.0]}]})"
        "\n";
    CHECK_THROWS_AS(from_string(line), DataError);
}

TEST_CASE("sort_by_utility orders by descending utility") {
    QueryInstance q;
    q.qid = "q";
    q.frequency = 1;
    q.items = {{"a", 0.1, 0.1, Group::Priv, {0.0}},
               {"b", 0.9, 0.9, Group::Priv, {0.0}},
               {"c", 0.5, 0.5, Group::Priv, {0.0}}};
    const Ranking r = sort_by_utility(q);
    REQUIRE(r.size() == 3);
    CHECK(r.order[0] == 1);
    CHECK(r.order[1] == 2);
    CHECK(r.order[2] == 0);
}

TEST_CASE("sort_by_utility breaks ties by ascending item id") {
    QueryInstance q;
    q.qid = "q";
    q.frequency = 1;
    q.items = {{"c", 1.0, 1.0, Group::Priv, {0.0}},
               {"a", 1.0, 1.0, Group::Priv, {0.0}},
               {"b", 1.0, 1.0, Group::Priv, {0.0}}};
    const Ranking r = sort_by_utility(q);
    CHECK(r.order[0] == 1);  // a
    CHECK(r.order[1] == 2);  // b
    CHECK(r.order[2] == 0);  // c
}

TEST_CASE("sort_by_utility on a single item is the identity") {
    QueryInstance q;
    q.qid = "q";
    q.frequency = 1;
    q.items = {{"a", 0.3, 0.3, Group::Dis, {0.0}}};
    const Ranking r = sort_by_utility(q);
    REQUIRE(r.size() == 1);
    CHECK(r.order[0] == 0);
}

TEST_CASE("save then load is the identity") {
    SyntheticConfig cfg;
    cfg.num_queries = 5;
    cfg.items_per_query = 8;
    cfg.seed = 99;
    const Corpus c = generate_synthetic(cfg);

    const std::string path = "roundtrip_corpus.jsonl";
    save_corpus(c, path);
    const Corpus d = load_corpus(path);

    REQUIRE(d.queries.size() == c.queries.size());
    for (size_t i = 0; i < c.queries.size(); ++i) {
        const auto& a = c.queries[i];
        const auto& b = d.queries[i];
        CHECK(a.qid == b.qid);
        CHECK(a.frequency == b.frequency);
        REQUIRE(a.items.size() == b.items.size());
        for (size_t j = 0; j < a.items.size(); ++j) {
            CHECK(a.items[j].id == b.items[j].id);
            CHECK(a.items[j].utility == b.items[j].utility);
            CHECK(a.items[j].relevance == b.items[j].relevance);
            CHECK(a.items[j].group == b.items[j].group);
            CHECK(a.items[j].features == b.items[j].features);
        }
    }

    // a second save of the reloaded corpus must be byte-identical
    const std::string path2 = "roundtrip_corpus2.jsonl";
    save_corpus(d, path2);
    CHECK(file_bytes(path) == file_bytes(path2));
    std::remove(path.c_str());
    std::remove(path2.c_str());
}

TEST_CASE("generator is deterministic in its seed") {
    SyntheticConfig cfg;
    cfg.num_queries = 6;
    cfg.items_per_query = 10;
    cfg.seed = 7;
    const Corpus a = generate_synthetic(cfg);
    const Corpus b = generate_synthetic(cfg);
    save_corpus(a, "gen_a.jsonl");
    save_corpus(b, "gen_b.jsonl");
    CHECK(file_bytes("gen_a.jsonl") == file_bytes("gen_b.jsonl"));
    std::remove("gen_a.jsonl");
    std::remove("gen_b.jsonl");

    SyntheticConfig other = cfg;
    other.seed = 8;
    const Corpus c = generate_synthetic(other);
    bool same = true;
    for (size_t i = 0; i < c.queries.size() && same; ++i)
        for (size_t j = 0; j < c.queries[i].items.size() && same; ++j)
            same = c.queries[i].items[j].features == a.queries[i].items[j].features;
    CHECK_FALSE(same);
}

TEST_CASE("zero outlier fraction plants nothing extreme") {
    SyntheticConfig cfg;
    cfg.num_queries = 20;
    cfg.items_per_query = 15;
    cfg.outlier_fraction = 0.0;
    cfg.seed = 3;
    const Corpus c = generate_synthetic(cfg);
    for (const auto& q : c.queries)
        for (const auto& it : q.items)
            for (double f : it.features) {
                CHECK(f >= 1.0);
                CHECK(f <= 10.0);
            }
}

TEST_CASE("planted outliers trip the dispersion detector at the expected rate") {
    SyntheticConfig cfg;  // 200 queries, 20 items, fraction 0.1, magnitude 50
    const Corpus c = generate_synthetic(cfg);
    REQUIRE(c.queries.size() == 200);
    REQUIRE(c.queries[0].size() == 20);

    DetectorConfig det;
    det.method = DetectorMethod::MAD;
    std::int64_t flagged = 0;
    for (const auto& q : c.queries) {
        const OutlierVector ov = detect(q, sort_by_utility(q), det);
        flagged += ov.binary.sum();
    }
    const double per_query = static_cast<double>(flagged) / 200.0;
    CHECK(per_query >= 1.0);
    CHECK(per_query <= 3.0);
}

TEST_CASE("generator respects group balance roughly") {
    SyntheticConfig cfg;
    cfg.num_queries = 50;
    cfg.items_per_query = 20;
    cfg.group_balance = 0.5;
    cfg.seed = 11;
    const Corpus c = generate_synthetic(cfg);
    int dis = 0, total = 0;
    for (const auto& q : c.queries)
        for (const auto& it : q.items) {
            dis += it.group == Group::Dis ? 1 : 0;
            ++total;
        }
    const double share = static_cast<double>(dis) / total;
    CHECK(share > 0.4);
    CHECK(share < 0.6);
}

TEST_CASE("config validation rejects out-of-range fields") {
    SyntheticConfig cfg;
    cfg.outlier_fraction = 1.5;
    CHECK_THROWS_AS(cfg.validate(), DataError);
    cfg = SyntheticConfig{};
    cfg.group_balance = 0.0;
    CHECK_THROWS_AS(cfg.validate(), DataError);
    cfg = SyntheticConfig{};
    cfg.outlier_magnitude = 0.5;
    CHECK_THROWS_AS(cfg.validate(), DataError);
    cfg = SyntheticConfig{};
    cfg.num_queries = 0;
    CHECK_THROWS_AS(cfg.validate(), DataError);
}
