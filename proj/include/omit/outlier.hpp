#pragma once

#include <vector>

#include "omit/types.hpp"

namespace omit {

enum class DetectorMethod { MAD, MedKNN, COPOD };

const char* to_string(DetectorMethod m);
DetectorMethod detector_method_from_string(const std::string& s);

struct DetectorConfig {
    DetectorMethod method = DetectorMethod::COPOD;
    int context_n = 0;           // 0 means "whole list"; otherwise clamped to N
    double mad_threshold = 3.5;  // modified Z-score cut
    int knn_k = 5;
    double contamination = 0.1;  // quantile cut for MedKNN / COPOD flags
    bool normalize = true;       // rescale flagged scores so the max is 1
    bool copod_skew_correction = true;

    void validate() const;
};

// Per-query outlier annotation. scores[i] is the (optionally normalized)
// degree of outlierness of item i, 0 for unflagged items and for items
// outside the detection context; binary[i] = scores[i] > 0.
struct OutlierVector {
    Vec scores;
    Eigen::VectorXi binary;

    int size() const { return static_cast<int>(scores.size()); }
};

// |modified Z-score| per value: 0.6745 * (x - median) / MAD. All-equal
// input (MAD = 0) scores everything 0. Scale and translation of the input
// rescale nothing: the scores are already scale/translation invariant.
Vec mad_scores(const Vec& values);

// Median distance to the k nearest neighbours (Euclidean, brute force,
// self excluded). k must be <= points.size() - 1.
Vec medknn_scores(const std::vector<Vec>& points, int k);

// Per-dimension empirical copula tail score, summed over dimensions.
// Left tail -ln F(x), right tail -ln Fbar(x); the per-dimension score picks
// the tail on the heavy side (sample skewness < 0 selects left, >= 0 right)
// and never exceeds the larger of the two tails. With the correction off
// it is the plain two-sided max.
Vec copod_scores(const std::vector<Vec>& points, bool skew_correction = true);

// Runs the configured detector over the first min(context_n, N) items of
// `initial` (0 meaning N); items outside the context always score 0.
// MAD flags scores above mad_threshold (max across feature dimensions),
// MedKNN/COPOD flag scores strictly above the (1 - contamination) empirical
// quantile of in-context scores, so at most floor(contamination * context)
// items are flagged. Unflagged scores are zeroed; flagged scores are
// divided by the max flagged score when normalize is set.
OutlierVector detect(const QueryInstance& q, const Ranking& initial,
                     const DetectorConfig& cfg);

}  // namespace omit
