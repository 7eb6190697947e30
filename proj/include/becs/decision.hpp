#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "becs/corpus.hpp"
#include "becs/lexicon.hpp"
#include "becs/normalizer.hpp"

namespace becs {

struct Thresholds {
    double tau_low = 0.12;
    double tau_high = 0.12;

    // 0 <= tau_low <= tau_high <= 1, else ConfigError.
    void validate() const;
};

struct PolicyConfig {
    std::size_t min_words = 15;
    // Financial-keyword list used by the short-message safeguard and the map
    // used to normalize subject and body before the keyword check.
    std::shared_ptr<const TermMatcher> financial_keywords;
    std::shared_ptr<const HomoglyphMap> homoglyphs;
};

// Builds a PolicyConfig from loaded resources.
PolicyConfig make_policy(const LexiconSet& lexicons, std::shared_ptr<const HomoglyphMap> map, std::size_t min_words = 15);

enum class Verdict { AutoAllow, AutoBlock, ManualReview };
enum class Reason { BelowLow, AboveHigh, GreyZone, ShortMessageSafeguard };

struct Decision {
    Verdict verdict;
    Reason reason;

    bool operator==(const Decision&) const = default;
};

std::string_view to_string(Verdict v);
std::string_view to_string(Reason r);

// True when the body has fewer than min_words words and the normalized
// subject or body contains a financial keyword.
bool safeguard_applies(const EmailRecord& email, const PolicyConfig& cfg);

// Grey-zone policy. The safeguard is checked first; then p < tau_low
// allows, p > tau_high blocks, and the closed band between (boundaries
// included) goes to manual review.
Decision decide(const EmailRecord& email, double p, const Thresholds& th, const PolicyConfig& cfg);

// Score-only part of decide(), without the safeguard.
Decision decide_score(double p, const Thresholds& th);

struct CostModel {
    double v_transaction = 137'000.0;
    double c_inv = 25.0;
    double c_rev = 25.0;

    void validate() const;
};

struct OutcomeCounts {
    std::size_t fn = 0;
    std::size_t fp = 0;
    std::size_t grey = 0;
};

// fn * V + fp * C_inv + grey * C_rev, in USD.
double expected_loss(const OutcomeCounts& outcomes, const CostModel& costs);

struct SurfacePoint {
    double tau_low;
    double tau_high;
    OutcomeCounts outcomes;
    double total_usd;
};

struct CostSurface {
    double step;
    std::vector<SurfacePoint> points;
};

// Evaluates every grid pair tau_low <= tau_high on {0, step, 2*step, ..., 1}
// with the score-only policy. A fraud email that is auto-allowed costs its
// own `values[i]` when given, else costs.v_transaction.
CostSurface sweep_cost_surface(std::span<const double> scores, std::span<const int> labels,
                               std::span<const std::optional<double>> values, const CostModel& costs,
                               double step = 0.01);
CostSurface sweep_cost_surface(std::span<const double> scores, std::span<const int> labels, const CostModel& costs,
                               double step = 0.01);

// Minimum-cost pair; ties go to the smaller tau_low, then smaller tau_high.
std::pair<Thresholds, double> optimal_thresholds(const CostSurface& surface);

struct RoiPoint {
    double v_transaction;
    double baseline_loss;  // every fraud succeeds: fraud_count * V
    double defended_loss;  // cost at the re-optimized thresholds
    Thresholds thresholds;
    double roi;            // (baseline - defended) / baseline
};

std::vector<RoiPoint> roi_sensitivity(std::span<const double> scores, std::span<const int> labels,
                                      const CostModel& costs, std::span<const double> v_range, double step = 0.01);

// Delimited export: header line then tau_low, tau_high, fn, fp, grey, total_usd.
void write_surface(std::ostream& out, const CostSurface& surface);

}  // namespace becs
