#include "omit/outlier.hpp"

#include <algorithm>
#include <cmath>

namespace omit {

const char* to_string(DetectorMethod m) {
    switch (m) {
        case DetectorMethod::MAD: return "mad";
        case DetectorMethod::MedKNN: return "medknn";
        case DetectorMethod::COPOD: return "copod";
    }
    throw InternalError("unknown detector method");
}

DetectorMethod detector_method_from_string(const std::string& s) {
    if (s == "mad") return DetectorMethod::MAD;
    if (s == "medknn") return DetectorMethod::MedKNN;
    if (s == "copod") return DetectorMethod::COPOD;
    throw DataError("unknown detector method \"" + s + "\"");
}

void DetectorConfig::validate() const {
    if (context_n < 0) throw DataError("context_n must be >= 0 (0 = whole list)");
    if (mad_threshold <= 0) throw DataError("mad_threshold must be > 0");
    if (knn_k < 1) throw DataError("knn_k must be >= 1");
    if (contamination <= 0 || contamination > 0.5)
        throw DataError("contamination must be in (0, 0.5]");
}

namespace {

double median_inplace(std::vector<double>& v) {
    const size_t n = v.size();
    std::sort(v.begin(), v.end());
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double median_of(const Vec& v) {
    std::vector<double> tmp(v.data(), v.data() + v.size());
    return median_inplace(tmp);
}

}  // namespace

Vec mad_scores(const Vec& values) {
    const int n = static_cast<int>(values.size());
    if (n == 0) return Vec();
    const double med = median_of(values);
    std::vector<double> dev(n);
    for (int i = 0; i < n; ++i) dev[i] = std::abs(values[i] - med);
    const double mad = median_inplace(dev);
    Vec out = Vec::Zero(n);
    if (mad == 0.0) return out;  // degenerate spread: nothing is anomalous
    for (int i = 0; i < n; ++i) out[i] = std::abs(0.6745 * (values[i] - med) / mad);
    return out;
}

Vec medknn_scores(const std::vector<Vec>& points, int k) {
    const int n = static_cast<int>(points.size());
    if (k < 1 || k > n - 1)
        throw DataError("medknn: k must be in [1, n-1], got k=" + std::to_string(k) +
                        " n=" + std::to_string(n));
    Vec out(n);
    std::vector<double> dist;
    dist.reserve(n - 1);
    for (int i = 0; i < n; ++i) {
        dist.clear();
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            dist.push_back((points[i] - points[j]).norm());
        }
        std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
        std::vector<double> nearest(dist.begin(), dist.begin() + k);
        out[i] = median_inplace(nearest);
    }
    return out;
}

namespace {

// sign of the moment-based sample skewness; only the sign matters here
double skewness_sign(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    double mean = 0;
    for (double v : x) mean += v;
    mean /= n;
    double m2 = 0, m3 = 0;
    for (double v : x) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n;
    m3 /= n;
    if (m2 == 0) return 0.0;
    const double g1 = m3 / std::pow(m2, 1.5);
    return g1 < 0 ? -1.0 : (g1 > 0 ? 1.0 : 0.0);
}

}  // namespace

Vec copod_scores(const std::vector<Vec>& points, bool skew_correction) {
    const int n = static_cast<int>(points.size());
    if (n == 0) return Vec();
    const int dims = static_cast<int>(points[0].size());
    Vec total = Vec::Zero(n);
    std::vector<double> col(n);
    for (int d = 0; d < dims; ++d) {
        for (int i = 0; i < n; ++i) col[i] = points[i][d];
        std::vector<double> sorted = col;
        std::sort(sorted.begin(), sorted.end());
        const double skew = skewness_sign(col);
        for (int i = 0; i < n; ++i) {
            // #{x_j <= x} via binary search on the sorted column
            const auto le = std::upper_bound(sorted.begin(), sorted.end(), col[i]) - sorted.begin();
            const auto ge = sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), col[i]);
            const double left = -std::log(static_cast<double>(le) / n);
            const double right = -std::log(static_cast<double>(ge) / n);
            const double two_sided = std::max(left, right);
            if (!skew_correction) {
                total[i] += two_sided;
            } else {
                // tail on the heavy side, capped by the two-sided score
                const double picked = skew < 0 ? left : right;
                total[i] += std::min(picked, two_sided);
            }
        }
    }
    return total;
}

namespace {

// 1-based ceil order statistic; strictly-above cut keeps the flagged count
// at or below floor(contamination * n).
double upper_quantile(const Vec& scores, double contamination) {
    const int n = static_cast<int>(scores.size());
    std::vector<double> sorted(scores.data(), scores.data() + n);
    std::sort(sorted.begin(), sorted.end());
    int rank = static_cast<int>(std::ceil((1.0 - contamination) * n));
    rank = std::clamp(rank, 1, n);
    return sorted[rank - 1];
}

}  // namespace

OutlierVector detect(const QueryInstance& q, const Ranking& initial, const DetectorConfig& cfg) {
    cfg.validate();
    const int n = q.size();
    if (!is_permutation(initial, n))
        throw DataError("detect: initial ranking is not a permutation of the query items");
    const int context = cfg.context_n == 0 ? n : std::min(cfg.context_n, n);

    // detection happens over the top `context` items of the initial ranking
    std::vector<int> ctx_items(initial.order.begin(), initial.order.begin() + context);
    std::vector<Vec> pts;
    pts.reserve(context);
    for (int idx : ctx_items) {
        const auto& f = q.items[idx].features;
        pts.push_back(Eigen::Map<const Vec>(f.data(), f.size()));
    }

    Vec raw;          // score per in-context item
    std::vector<char> flagged(context, 0);
    if (cfg.method == DetectorMethod::MAD) {
        const int dims = static_cast<int>(pts[0].size());
        raw = Vec::Zero(context);
        for (int d = 0; d < dims; ++d) {
            Vec col(context);
            for (int i = 0; i < context; ++i) col[i] = pts[i][d];
            Vec s = mad_scores(col);
            for (int i = 0; i < context; ++i) raw[i] = std::max(raw[i], s[i]);
        }
        for (int i = 0; i < context; ++i) flagged[i] = raw[i] > cfg.mad_threshold;
    } else {
        raw = cfg.method == DetectorMethod::MedKNN
                  ? medknn_scores(pts, cfg.knn_k)
                  : copod_scores(pts, cfg.copod_skew_correction);
        const double cut = upper_quantile(raw, cfg.contamination);
        for (int i = 0; i < context; ++i) flagged[i] = raw[i] > cut;
    }

    OutlierVector out;
    out.scores = Vec::Zero(n);
    out.binary = Eigen::VectorXi::Zero(n);
    double max_flagged = 0.0;
    for (int i = 0; i < context; ++i)
        if (flagged[i]) max_flagged = std::max(max_flagged, raw[i]);
    for (int i = 0; i < context; ++i) {
        if (!flagged[i]) continue;
        double s = raw[i];
        if (cfg.normalize && max_flagged > 0) s /= max_flagged;
        out.scores[ctx_items[i]] = s;
        out.binary[ctx_items[i]] = 1;
    }
    return out;
}

}  // namespace omit
