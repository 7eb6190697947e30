#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "becs/lexicon.hpp"
#include "becs/normalizer.hpp"

namespace becs {

// Canonical feature order. data/feature_schema.txt lists the same names in
// the same order; serialized models refer to features by this index.
enum class Feature : std::size_t {
    // Psycholinguistic
    authority_count,
    scarcity_count,
    reciprocity_count,
    urgency_count,
    urgency_density,
    financial_keyword_count,
    tech_threat_count,
    second_person_count,
    persuasion_cue_total,
    authority_density,
    financial_density,
    cue_diversity,
    // Forensic
    hedge_count,
    booster_count,
    exclusive_word_count,
    first_person_count,
    sentence_count,
    avg_sentence_length,
    type_token_ratio,
    // Sentiment
    polarity,
    subjectivity,
    positive_ratio,
    negative_ratio,
    sentiment_delta,
    psi_score,
    // Structural
    caps_ratio,
    url_count,
    punctuation_density,
    word_count,
    char_count,
    avg_word_length,
    complex_word_ratio,
    ent_money_count,
    digit_ratio,
    obfuscation_count,
};

inline constexpr std::size_t kFeatureCount = 35;

std::string_view feature_name(Feature f);
inline std::string_view feature_name(std::size_t index) { return feature_name(static_cast<Feature>(index)); }
std::optional<Feature> feature_from_name(std::string_view name);

// FNV-1a over the newline-joined feature names.
std::uint64_t feature_schema_hash();

// True for features constrained to [0, 1].
bool is_ratio_feature(Feature f);

struct FeatureVector {
    std::array<double, kFeatureCount> values{};
    std::uint64_t schema_hash = feature_schema_hash();

    double& operator[](Feature f) { return values[static_cast<std::size_t>(f)]; }
    double operator[](Feature f) const { return values[static_cast<std::size_t>(f)]; }

    bool operator==(const FeatureVector&) const = default;
};

struct PsiParams {
    double alpha = 1.0;
    double beta = 10.0;
};

// Smiling Assassin score: sigmoid(alpha * s_pos * ln(1 + beta * u_freq)).
// Throws std::invalid_argument unless alpha > 0 and beta > 0.
double smiling_assassin(double s_pos, double u_freq, double alpha, double beta);

// Maximal non-empty runs between Unicode whitespace.
std::size_t word_count(std::string_view text);

FeatureVector extract_features(const NormalizedText& norm, const LexiconSet& lexicons, const PsiParams& psi = {});

}  // namespace becs
