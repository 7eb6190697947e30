#include "becs/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "becs/error.hpp"
#include "becs/random.hpp"

namespace becs {

namespace {

void check_lengths(std::size_t a, std::size_t b) {
    if (a != b) throw DataError("input lengths differ");
    if (a == 0) throw DataError("inputs are empty");
}

double safe_div(double num, double den) { return den > 0.0 ? num / den : 0.0; }

struct MeanCi {
    double mean;
    double half_width;
};

MeanCi mean_ci(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

}  // namespace

ConfusionMatrix confusion(std::span<const double> scores, std::span<const int> labels, double threshold) {
    check_lengths(scores.size(), labels.size());
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool positive = scores[i] > threshold;
        if (labels[i] == 1) {
            positive ? ++cm.tp : ++cm.fn;
        } else {
            positive ? ++cm.fp : ++cm.tn;
        }
    }
    return cm;
}

double precision(const ConfusionMatrix& cm) { return safe_div(static_cast<double>(cm.tp), static_cast<double>(cm.tp + cm.fp)); }
double recall(const ConfusionMatrix& cm) { return safe_div(static_cast<double>(cm.tp), static_cast<double>(cm.tp + cm.fn)); }
double f1(const ConfusionMatrix& cm) {
    const double p = precision(cm), r = recall(cm);
    return safe_div(2.0 * p * r, p + r);
}
double accuracy(const ConfusionMatrix& cm) {
    return safe_div(static_cast<double>(cm.tp + cm.tn), static_cast<double>(cm.total()));
}

double auc(std::span<const double> scores, std::span<const int> labels) {
    check_lengths(scores.size(), labels.size());
    const std::size_t n = scores.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double positive_rank_sum = 0.0;
    std::size_t positives = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (labels[idx[k]] == 1) {
                positive_rank_sum += avg_rank;
                ++positives;
            }
        }
        i = j;
    }
    const std::size_t negatives = n - positives;
    if (positives == 0 || negatives == 0) throw DataError("AUC needs both classes");
    const double np = static_cast<double>(positives);
    return (positive_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(negatives));
}

double brier(std::span<const double> scores, std::span<const int> labels) {
    check_lengths(scores.size(), labels.size());
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double d = scores[i] - labels[i];
        total += d * d;
    }
    return total / static_cast<double>(scores.size());
}

std::vector<ReliabilityBin> reliability_bins(std::span<const double> scores, std::span<const int> labels,
                                             std::size_t n_bins) {
    check_lengths(scores.size(), labels.size());
    if (n_bins == 0) throw ConfigError("reliability diagram needs at least one bin");
    std::vector<ReliabilityBin> bins(n_bins);
    std::vector<double> score_sum(n_bins, 0.0), positive_sum(n_bins, 0.0);
    for (std::size_t b = 0; b < n_bins; ++b) {
        bins[b].lower = static_cast<double>(b) / static_cast<double>(n_bins);
        bins[b].upper = static_cast<double>(b + 1) / static_cast<double>(n_bins);
        bins[b].count = 0;
    }
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double s = std::clamp(scores[i], 0.0, 1.0);
        const auto b = std::min(n_bins - 1, static_cast<std::size_t>(s * static_cast<double>(n_bins)));
        score_sum[b] += scores[i];
        positive_sum[b] += labels[i];
        ++bins[b].count;
    }
    for (std::size_t b = 0; b < n_bins; ++b) {
        const double c = static_cast<double>(bins[b].count);
        bins[b].mean_score = safe_div(score_sum[b], c);
        bins[b].empirical_rate = safe_div(positive_sum[b], c);
    }
    return bins;
}

double mcnemar(std::size_t b, std::size_t c) {
    if (b + c == 0) throw DataError("McNemar's test needs at least one discordant pair");
    const double diff = std::fabs(static_cast<double>(b) - static_cast<double>(c)) - 1.0;
    return diff * diff / static_cast<double>(b + c);
}

DisagreementCounts disagreement(std::span<const double> scores_a, std::span<const double> scores_b,
                                std::span<const int> labels, double threshold) {
    check_lengths(scores_a.size(), labels.size());
    check_lengths(scores_b.size(), labels.size());
    DisagreementCounts out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool a_ok = (scores_a[i] > threshold) == (labels[i] == 1);
        const bool b_ok = (scores_b[i] > threshold) == (labels[i] == 1);
        if (a_ok && b_ok) {
            ++out.both_correct;
        } else if (!a_ok && !b_ok) {
            ++out.both_wrong;
        } else if (!a_ok) {
            ++out.a_only_errors;
        } else {
            ++out.b_only_errors;
        }
    }
    return out;
}

double score_correlation(std::span<const double> a, std::span<const double> b) {
    check_lengths(a.size(), b.size());
    if (a.size() < 2) throw DataError("correlation needs at least two points");
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) throw DataError("correlation is undefined for a constant vector");
    return sab / std::sqrt(saa * sbb);
}

std::vector<LearningCurvePoint> learning_curve(std::span<const LabeledVector> data, std::span<const std::size_t> sizes,
                                               std::size_t folds, const Hyperparameters& hp, std::uint64_t seed) {
    if (folds < 2) throw ConfigError("learning curve needs at least two folds");
    if (data.size() < folds) throw DataError("fewer samples than folds");

    // Stratified fold assignment: deal each shuffled class round-robin.
    std::vector<std::size_t> fold_of(data.size());
    for (int c = 0; c < 2; ++c) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < data.size(); ++i)
            if (data[i].label == c) idx.push_back(i);
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(c)));
        rng.shuffle(idx);
        for (std::size_t k = 0; k < idx.size(); ++k) fold_of[idx[k]] = k % folds;
    }

    std::size_t smallest_pool = data.size();
    for (std::size_t f = 0; f < folds; ++f) {
        const auto held = static_cast<std::size_t>(std::count(fold_of.begin(), fold_of.end(), f));
        smallest_pool = std::min(smallest_pool, data.size() - held);
    }
    for (std::size_t s : sizes) {
        if (s > smallest_pool)
            throw DataError("training size " + std::to_string(s) + " exceeds available training data (" +
                            std::to_string(smallest_pool) + ")");
        if (s < 2) throw DataError("training size must be at least 2");
    }

    std::vector<LearningCurvePoint> out;
    for (std::size_t s : sizes) {
        std::vector<double> train_aucs, val_aucs;
        for (std::size_t f = 0; f < folds; ++f) {
            std::vector<std::size_t> pool[2];
            std::vector<double> val_scores;
            std::vector<int> val_labels;
            for (std::size_t i = 0; i < data.size(); ++i) {
                if (fold_of[i] == f) continue;
                pool[data[i].label].push_back(i);
            }
            const double pool_size = static_cast<double>(pool[0].size() + pool[1].size());
            auto n_pos = static_cast<std::size_t>(std::llround(static_cast<double>(s) * static_cast<double>(pool[1].size()) / pool_size));
            n_pos = std::clamp<std::size_t>(n_pos, 1, s - 1);
            const std::size_t n_neg = s - n_pos;
            if (n_pos > pool[1].size() || n_neg > pool[0].size())
                throw DataError("training size " + std::to_string(s) + " cannot be stratified");

            std::vector<LabeledVector> subset;
            subset.reserve(s);
            for (int c = 0; c < 2; ++c) {
                Rng rng(mix_seed(seed, 1000 + f * 7919 + s * 2 + static_cast<std::size_t>(c)));
                rng.shuffle(pool[c]);
                const std::size_t take = c == 1 ? n_pos : n_neg;
                for (std::size_t k = 0; k < take; ++k) subset.push_back(data[pool[c][k]]);
            }
            const auto model = train(subset, hp);

            std::vector<double> train_scores;
            std::vector<int> train_labels;
            for (const auto& row : subset) {
                train_scores.push_back(predict_proba(model, row.features));
                train_labels.push_back(row.label);
            }
            for (std::size_t i = 0; i < data.size(); ++i) {
                if (fold_of[i] != f) continue;
                val_scores.push_back(predict_proba(model, data[i].features));
                val_labels.push_back(data[i].label);
            }
            train_aucs.push_back(auc(train_scores, train_labels));
            val_aucs.push_back(auc(val_scores, val_labels));
        }
        const auto tr = mean_ci(train_aucs);
        const auto va = mean_ci(val_aucs);
        out.push_back({s, tr.mean, tr.half_width, va.mean, va.half_width});
    }
    return out;
}

double nearest_rank(std::vector<double> values, double q) {
    if (values.empty()) throw DataError("percentile of an empty sample");
    if (!(q > 0.0 && q <= 100.0)) throw ConfigError("percentile must be in (0, 100]");
    std::sort(values.begin(), values.end());
    const auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * static_cast<double>(values.size())));
    return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

LatencyStats latency_stats(std::vector<double> timings_ms) {
    if (timings_ms.empty()) throw DataError("latency statistics need at least one timing");
    LatencyStats stats;
    stats.n = timings_ms.size();
    stats.mean_ms = std::accumulate(timings_ms.begin(), timings_ms.end(), 0.0) / static_cast<double>(stats.n);
    stats.median_ms = nearest_rank(timings_ms, 50.0);
    stats.p95_ms = nearest_rank(timings_ms, 95.0);
    stats.max_ms = *std::max_element(timings_ms.begin(), timings_ms.end());
    stats.timings_ms = std::move(timings_ms);
    return stats;
}

LatencyStats latency_bench(const std::function<double(const EmailRecord&)>& pipeline, const Corpus& emails,
                           std::size_t warmup) {
    if (emails.empty()) throw DataError("latency benchmark needs at least one email");
    using clock = std::chrono::steady_clock;
    volatile double sink = 0.0;
    for (std::size_t i = 0; i < warmup; ++i) sink = sink + pipeline(emails[i % emails.size()]);

    std::vector<double> timings;
    timings.reserve(emails.size());
    for (const auto& email : emails) {
        const auto start = clock::now();
        const double p = pipeline(email);
        const auto stop = clock::now();
        sink = sink + p;
        timings.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
    }
    return latency_stats(std::move(timings));
}

}  // namespace becs
