#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "becs/corpus.hpp"
#include "becs/normalizer.hpp"

namespace becs {

struct PoisonConfig {
    double substitution_probability = 0.15;   // per eligible character
    double zwsp_insertion_probability = 0.05; // per word start
    double corpus_poison_rate = 0.30;         // fraction of fraud records
    std::uint64_t seed = 42;

    void validate() const;
};

// Canonical character -> confusables that normalize back to it. Built by
// inverting the single-codepoint entries of a HomoglyphMap; multi-character
// replacements cannot be inverted and are skipped.
class ReverseMap {
public:
    static ReverseMap invert(const HomoglyphMap& map);

    // Only Latin 'a' -> Cyrillic U+0430, plus U+200B insertion.
    static ReverseMap cyrillic_a_only();

    const std::vector<char32_t>* confusables(char32_t canonical) const {
        const auto it = table_.find(canonical);
        return it == table_.end() ? nullptr : &it->second;
    }
    // Invisible codepoint used for insertion, if the source map has one.
    std::optional<char32_t> zero_width() const { return zero_width_; }
    std::size_t size() const { return table_.size(); }

private:
    std::unordered_map<char32_t, std::vector<char32_t>> table_;
    std::optional<char32_t> zero_width_;
};

// Replaces each eligible character with a random confusable with
// substitution_probability and inserts a zero-width character before each
// word with zwsp_insertion_probability. Deterministic in `seed`.
std::string poison_text(std::string_view text, const PoisonConfig& cfg, const ReverseMap& reverse,
                        std::uint64_t seed);
inline std::string poison_text(std::string_view text, const PoisonConfig& cfg, const ReverseMap& reverse) {
    return poison_text(text, cfg, reverse, cfg.seed);
}

// Poisons exactly floor(rate * fraud_count) fraud records chosen by seeded
// sampling and marks them poisoned = true. Everything else is returned
// unchanged.
Corpus poison_corpus(const Corpus& corpus, const PoisonConfig& cfg, const ReverseMap& reverse);

// Poisons every record (used to build the attacked copy of a test set).
Corpus poison_all(const Corpus& corpus, const PoisonConfig& cfg, const ReverseMap& reverse);

struct RobustnessReport {
    double clean_recall = 0.0;
    double poisoned_recall = 0.0;
    double drop = 0.0;  // clean_recall - poisoned_recall, as a fraction

    double drop_points() const { return 100.0 * drop; }
};

using EmailScorer = std::function<double(const EmailRecord&)>;

// Recall = fraction of records scored strictly above threshold.
RobustnessReport robustness_report(const EmailScorer& scorer, const Corpus& clean_frauds,
                                   const Corpus& poisoned_frauds, double threshold);

}  // namespace becs
