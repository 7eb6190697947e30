#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "becs/corpus.hpp"
#include "becs/model.hpp"

namespace becs {

struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
};

// Positive iff score > threshold, the same strict rule as the block branch
// of the grey-zone policy.
ConfusionMatrix confusion(std::span<const double> scores, std::span<const int> labels, double threshold);

// All three return 0 when their denominator is 0.
double precision(const ConfusionMatrix& cm);
double recall(const ConfusionMatrix& cm);
double f1(const ConfusionMatrix& cm);
double accuracy(const ConfusionMatrix& cm);

// Mann-Whitney rank statistic; tied scores get half credit.
double auc(std::span<const double> scores, std::span<const int> labels);

double brier(std::span<const double> scores, std::span<const int> labels);

struct ReliabilityBin {
    double lower;
    double upper;
    double mean_score;      // 0 when the bin is empty
    double empirical_rate;  // fraction of positives, 0 when empty
    std::size_t count;
};

// Equal-width bins over [0, 1]; bins are [lo, hi) except the last, which is
// closed.
std::vector<ReliabilityBin> reliability_bins(std::span<const double> scores, std::span<const int> labels,
                                             std::size_t n_bins = 10);

// Continuity-corrected McNemar statistic (|b - c| - 1)^2 / (b + c).
double mcnemar(std::size_t b, std::size_t c);

struct DisagreementCounts {
    std::size_t a_only_errors = 0;  // b in the McNemar table
    std::size_t b_only_errors = 0;  // c
    std::size_t both_correct = 0;
    std::size_t both_wrong = 0;
};

DisagreementCounts disagreement(std::span<const double> scores_a, std::span<const double> scores_b,
                                std::span<const int> labels, double threshold);

double score_correlation(std::span<const double> a, std::span<const double> b);

struct LearningCurvePoint {
    std::size_t train_size;
    double train_auc_mean;
    double train_auc_ci;  // half-width of the normal-approximation 95% interval
    double validation_auc_mean;
    double validation_auc_ci;
};

// Stratified k-fold curve: for each size, each fold trains on a stratified
// subsample of that many rows from the other folds and is scored on the
// held-out fold.
std::vector<LearningCurvePoint> learning_curve(std::span<const LabeledVector> data, std::span<const std::size_t> sizes,
                                               std::size_t folds, const Hyperparameters& hp, std::uint64_t seed);

struct LatencyStats {
    double mean_ms = 0.0;
    double median_ms = 0.0;
    double p95_ms = 0.0;
    double max_ms = 0.0;
    std::size_t n = 0;
    std::vector<double> timings_ms;  // in input order
};

// Nearest-rank percentile, q in (0, 100].
double nearest_rank(std::vector<double> values, double q);
LatencyStats latency_stats(std::vector<double> timings_ms);

// Times `pipeline` once per email on a single thread after `warmup`
// untimed calls cycling through the emails.
LatencyStats latency_bench(const std::function<double(const EmailRecord&)>& pipeline, const Corpus& emails,
                           std::size_t warmup = 100);

}  // namespace becs
