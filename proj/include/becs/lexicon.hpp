#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace becs {

enum class Lexicon : std::size_t {
    urgency,
    authority,
    scarcity,
    reciprocity,
    hedges,
    boosters,
    exclusive_words,
    positive_sentiment,
    negative_sentiment,
    financial_keywords,
    tech_threat_keywords,
    money_entity_patterns,
};

inline constexpr std::size_t kLexiconCount = 12;

// File stem of each list inside a lexicon directory (`<name>.txt`).
std::string_view lexicon_name(Lexicon which);

// Splits text into lexical tokens: maximal runs of characters that are
// neither Unicode whitespace nor punctuation, ASCII-lowercased.
std::vector<std::string> lexical_tokens(std::u32string_view text);
std::vector<std::string> lexical_tokens(std::string_view utf8_text);

// Counts occurrences of single- and multi-word terms in a token stream.
// Matching is greedy and non-overlapping: at each position the longest
// matching term wins and scanning resumes after it.
class TermMatcher {
public:
    TermMatcher() = default;
    explicit TermMatcher(const std::vector<std::string>& terms);

    std::size_t count(std::span<const std::string> tokens) const;
    bool any(std::span<const std::string> tokens) const;

private:
    // Length of the longest term starting at tokens[pos], or 0.
    std::size_t match_at(std::span<const std::string> tokens, std::size_t pos) const;

    std::unordered_map<std::string, std::vector<std::vector<std::string>>> by_first_;
};

// The twelve named term lists. Terms are stored lowercased; each list is
// non-empty and duplicate-free. money_entity_patterns holds ECMAScript
// regular expressions matched against lowercased text rather than words.
class LexiconSet {
public:
    static LexiconSet load(const std::filesystem::path& directory);
    static LexiconSet from_lists(const std::map<Lexicon, std::vector<std::string>>& lists);

    const std::vector<std::string>& terms(Lexicon which) const { return terms_[index(which)]; }
    const TermMatcher& matcher(Lexicon which) const { return matchers_[index(which)]; }
    const std::vector<std::regex>& money_patterns() const { return money_patterns_; }

    // Number of money-entity spans matched in lowercased text;
    // overlapping matches from different patterns count once.
    std::size_t count_money_entities(std::string_view lowered_text) const;

private:
    static constexpr std::size_t index(Lexicon which) { return static_cast<std::size_t>(which); }

    std::array<std::vector<std::string>, kLexiconCount> terms_;
    std::array<TermMatcher, kLexiconCount> matchers_;
    std::vector<std::regex> money_patterns_;
};

}  // namespace becs
