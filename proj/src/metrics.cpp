#include "omit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace omit {

Vec exposure(const Mat& P, const Vec& v) {
    if (P.cols() != v.size()) throw DataError("exposure: dimension mismatch");
    return P * v;
}

double expected_utility(const Mat& P, const Vec& u, const Vec& v) {
    if (P.rows() != u.size() || P.cols() != v.size())
        throw DataError("expected_utility: dimension mismatch");
    return u.dot(P * v);
}

double outlierness_at_k(const Mat& P, const Vec& o, const Vec& h) {
    if (P.rows() != o.size() || P.cols() != h.size())
        throw DataError("outlierness_at_k: dimension mismatch");
    return o.dot(P * h);
}

double ranking_outlierness(const Ranking& sigma, const Vec& o, const Vec& h) {
    const int n = sigma.size();
    if (o.size() != n || h.size() != n)
        throw DataError("ranking_outlierness: dimension mismatch");
    double s = 0.0;
    for (int pos = 0; pos < n; ++pos) s += o[sigma.order[pos]] * h[pos];
    return s;
}

double ndcg_at_k(const Ranking& sigma, const Vec& rel, int k) {
    const int n = sigma.size();
    if (rel.size() != n) throw DataError("ndcg_at_k: dimension mismatch");
    if (k < 1) throw DataError("ndcg_at_k: k must be >= 1");
    k = std::min(k, n);
    if (rel.maxCoeff() <= 0.0) return 1.0;  // nothing to gain, nothing lost

    double dcg = 0.0;
    for (int pos = 0; pos < k; ++pos)
        dcg += rel[sigma.order[pos]] / std::log2(2.0 + pos);

    std::vector<double> sorted(rel.data(), rel.data() + n);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double idcg = 0.0;
    for (int pos = 0; pos < k; ++pos) idcg += sorted[pos] / std::log2(2.0 + pos);
    return dcg / idcg;
}

double expected_ndcg_at_k(const RankingDecomposition& d, const Vec& rel, int k) {
    const double total = d.total_weight();
    if (total <= 0) throw DataError("expected_ndcg_at_k: empty decomposition");
    double acc = 0.0;
    for (const auto& term : d.terms) acc += term.theta * ndcg_at_k(term.sigma, rel, k);
    return acc / total;
}

const Ranking& sample_ranking(const RankingDecomposition& d, RngStream& rng) {
    if (d.terms.empty()) throw DataError("sample_ranking: empty decomposition");
    const double total = d.total_weight();
    double target = rng.next_double() * total;
    for (const auto& term : d.terms) {
        target -= term.theta;
        if (target < 0) return term.sigma;
    }
    return d.terms.back().sigma;  // target landed on accumulated rounding
}

void SequenceConfig::validate() const {
    if (length < 1) throw DataError("sequence length must be >= 1");
    if (attention_base <= 1) throw DataError("attention base must be > 1");
}

std::vector<std::int64_t> stream_counts(const std::vector<std::int64_t>& frequencies,
                                        std::int64_t length) {
    const int q = static_cast<int>(frequencies.size());
    if (q == 0) throw DataError("stream_counts: no queries");
    if (length < q)
        throw DataError("sequence length " + std::to_string(length) +
                        " cannot cover " + std::to_string(q) + " queries");
    double total = 0;
    for (auto f : frequencies) {
        if (f < 1) throw DataError("stream_counts: frequency must be >= 1");
        total += static_cast<double>(f);
    }
    // one guaranteed impression each, remainder by largest fractional part
    std::vector<std::int64_t> counts(q, 1);
    const std::int64_t rest = length - q;
    std::vector<double> quota(q), frac(q);
    std::int64_t assigned = 0;
    for (int i = 0; i < q; ++i) {
        quota[i] = static_cast<double>(rest) * static_cast<double>(frequencies[i]) / total;
        const auto fl = static_cast<std::int64_t>(std::floor(quota[i]));
        counts[i] += fl;
        frac[i] = quota[i] - static_cast<double>(fl);
        assigned += fl;
    }
    std::vector<int> idx(q);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return frac[a] > frac[b]; });
    for (std::int64_t r = 0; r < rest - assigned; ++r) ++counts[idx[r % q]];
    return counts;
}

namespace {

struct Welford {
    std::int64_t n = 0;
    double mean = 0, m2 = 0;
    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double se() const { return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

// covariance accumulator for the dTR ratio's delta-method error
struct Welford2 {
    std::int64_t n = 0;
    double ma = 0, mb = 0, caa = 0, cbb = 0, cab = 0;
    void add(double a, double b) {
        ++n;
        const double da = a - ma, db = b - mb;
        ma += da / static_cast<double>(n);
        mb += db / static_cast<double>(n);
        caa += da * (a - ma);
        cbb += db * (b - mb);
        cab += da * (b - mb);
    }
};

}  // namespace

MetricsReport evaluate_query_sequence(const Corpus& corpus,
                                      const std::map<std::string, StochasticPolicy>& policies,
                                      const std::map<std::string, OutlierVector>& outliers,
                                      const SequenceConfig& cfg) {
    cfg.validate();
    validate_corpus(corpus);

    std::vector<std::int64_t> freqs;
    for (const auto& q : corpus.queries) freqs.push_back(q.frequency);
    const std::vector<std::int64_t> counts = stream_counts(freqs, cfg.length);

    MetricsReport report;
    report.sequence_length = cfg.length;
    report.seed = cfg.seed;
    RngStream master(cfg.seed);

    for (size_t qi = 0; qi < corpus.queries.size(); ++qi) {
        const QueryInstance& q = corpus.queries[qi];
        const int n = q.size();
        auto pit = policies.find(q.qid);
        if (pit == policies.end())
            throw DataError("no policy for query \"" + q.qid + "\"");
        auto oit = outliers.find(q.qid);
        if (oit == outliers.end())
            throw DataError("no outlier vector for query \"" + q.qid + "\"");
        const StochasticPolicy& policy = pit->second;
        const OutlierVector& ov = oit->second;
        if (ov.size() != n)
            throw DataError("outlier vector size mismatch for query \"" + q.qid + "\"");
        for (const auto& term : policy.decomposition.terms)
            if (!is_permutation(term.sigma, n))
                throw DataError("policy for query \"" + q.qid +
                                "\" holds an invalid ranking");

        const Vec v = attention_vector(n, cfg.attention_base);
        const Vec h = top_k_mask(n, 10);
        const Vec rel = q.relevances();
        const Vec ob = ov.binary.cast<double>();

        QueryEvaluation row;
        row.qid = q.qid;
        row.method = policy.method;
        row.impressions = counts[qi];
        row.fallback = policy.provenance == Provenance::FallbackInitial;
        row.zero_relevance = rel.maxCoeff() <= 0.0;
        if (row.zero_relevance) ++report.zero_relevance_queries;

        // analytic expectations; all are theta-linear except dTR, which is
        // a ratio of theta-linear exposures and comes from the marginal
        const RankingDecomposition& dec = policy.decomposition;
        row.ndcg5 = expected_ndcg_at_k(dec, rel, 5);
        row.ndcg10 = expected_ndcg_at_k(dec, rel, 10);
        const Mat P = dec.reconstruct(n) / dec.total_weight();
        row.outliers10 = outlierness_at_k(P, ob, h);
        row.outlierness10 = outlierness_at_k(P, ov.scores, h);
        row.dtr_value = dtr(P, q, v);

        // empirical stream; substream keyed by (seed, qid, t) so sharding
        // and evaluation order cannot change a single sampled byte
        Welford ndcg5s, ndcg10s, flag_count, outlier_mass;
        Welford2 expo;
        double u_dis = 0, u_priv = 0;
        for (const Item& it : q.items)
            (it.group == Group::Dis ? u_dis : u_priv) += it.utility;
        RngStream qstream = master.fork(q.qid);
        for (std::int64_t t = 0; t < counts[qi]; ++t) {
            RngStream r = qstream.fork(static_cast<std::uint64_t>(t));
            const Ranking& sigma = sample_ranking(dec, r);
            ndcg5s.add(ndcg_at_k(sigma, rel, 5));
            ndcg10s.add(ndcg_at_k(sigma, rel, 10));
            flag_count.add(ranking_outlierness(sigma, ob, h));
            outlier_mass.add(ranking_outlierness(sigma, ov.scores, h));
            double e_dis = 0, e_priv = 0;
            for (int pos = 0; pos < n; ++pos) {
                const Item& it = q.items[sigma.order[pos]];
                (it.group == Group::Dis ? e_dis : e_priv) += v[pos];
            }
            expo.add(e_dis, e_priv);
        }
        row.emp_ndcg5 = ndcg5s.mean;
        row.emp_ndcg10 = ndcg10s.mean;
        row.emp_outliers10 = flag_count.mean;
        row.emp_outlierness10 = outlier_mass.mean;
        row.se_ndcg5 = ndcg5s.se();
        row.se_ndcg10 = ndcg10s.se();
        row.se_outliers10 = flag_count.se();
        row.se_outlierness10 = outlier_mass.se();
        if (row.dtr_value && expo.mb > 0 && u_dis > 0 && u_priv > 0) {
            const double ratio = (expo.ma / u_dis) / (expo.mb / u_priv);
            row.emp_dtr = ratio;
            if (expo.n > 1 && expo.ma > 0) {
                const double nn = static_cast<double>(expo.n);
                const double va = expo.caa / (nn - 1) / nn;
                const double vb = expo.cbb / (nn - 1) / nn;
                const double vab = expo.cab / (nn - 1) / nn;
                const double rel_var = va / (expo.ma * expo.ma) + vb / (expo.mb * expo.mb) -
                                       2 * vab / (expo.ma * expo.mb);
                row.se_dtr = std::abs(ratio) * std::sqrt(std::max(0.0, rel_var));
            }
        }
        report.rows.push_back(std::move(row));
    }

    std::sort(report.rows.begin(), report.rows.end(),
              [](const auto& a, const auto& b) { return a.qid < b.qid; });
    if (!report.rows.empty()) report.method = report.rows.front().method;

    // impression-weighted aggregates
    double w_total = 0, w_dtr = 0;
    Aggregates& an = report.analytic;
    Aggregates& em = report.empirical;
    double an_dtr = 0, em_dtr = 0;
    for (const auto& row : report.rows) {
        const double w = static_cast<double>(row.impressions);
        w_total += w;
        an.ndcg5 += w * row.ndcg5;
        an.ndcg10 += w * row.ndcg10;
        an.outliers10 += w * row.outliers10;
        an.outlierness10 += w * row.outlierness10;
        em.ndcg5 += w * row.emp_ndcg5;
        em.ndcg10 += w * row.emp_ndcg10;
        em.outliers10 += w * row.emp_outliers10;
        em.outlierness10 += w * row.emp_outlierness10;
        if (row.dtr_value && row.emp_dtr) {
            w_dtr += w;
            an_dtr += w * *row.dtr_value;
            em_dtr += w * *row.emp_dtr;
        }
        if (row.fallback) ++report.fallback_count;
    }
    an.ndcg5 /= w_total;
    an.ndcg10 /= w_total;
    an.outliers10 /= w_total;
    an.outlierness10 /= w_total;
    em.ndcg5 /= w_total;
    em.ndcg10 /= w_total;
    em.outliers10 /= w_total;
    em.outlierness10 /= w_total;
    if (w_dtr > 0) {
        an.dtr_value = an_dtr / w_dtr;
        em.dtr_value = em_dtr / w_dtr;
    }
    report.fallback_rate =
        static_cast<double>(report.fallback_count) / static_cast<double>(report.rows.size());
    return report;
}

}  // namespace omit
