#include "becs/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "becs/error.hpp"
#include "becs/utf8.hpp"

namespace becs {

namespace {

constexpr std::array<std::string_view, kLexiconCount> kNames = {
    "urgency",         "authority",          "scarcity",           "reciprocity",
    "hedges",          "boosters",           "exclusive_words",    "positive_sentiment",
    "negative_sentiment", "financial_keywords", "tech_threat_keywords", "money_entity_patterns",
};

std::string trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

std::vector<std::string> read_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("lexicon list '" + path.stem().string() + "' missing: " + path.string());
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        std::string term = trim(line);
        if (term.empty() || term.front() == '#') continue;
        out.push_back(std::move(term));
    }
    return out;
}

}  // namespace

std::string_view lexicon_name(Lexicon which) { return kNames[static_cast<std::size_t>(which)]; }

std::vector<std::string> lexical_tokens(std::u32string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char32_t cp : text) {
        if (utf8::is_space(cp) || utf8::is_punct(cp)) {
            if (!current.empty()) {
                tokens.push_back(std::move(current));
                current.clear();
            }
        } else {
            utf8::append(current, utf8::ascii_lower(cp));
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::vector<std::string> lexical_tokens(std::string_view utf8_text) { return lexical_tokens(utf8::decode(utf8_text)); }

TermMatcher::TermMatcher(const std::vector<std::string>& terms) {
    for (const auto& term : terms) {
        auto tokens = lexical_tokens(std::string_view(term));
        if (tokens.empty()) continue;
        by_first_[tokens.front()].push_back(std::move(tokens));
    }
    for (auto& [first, candidates] : by_first_) {
        std::stable_sort(candidates.begin(), candidates.end(),
                         [](const auto& a, const auto& b) { return a.size() > b.size(); });
    }
}

std::size_t TermMatcher::match_at(std::span<const std::string> tokens, std::size_t pos) const {
    const auto it = by_first_.find(tokens[pos]);
    if (it == by_first_.end()) return 0;
    for (const auto& candidate : it->second) {
        if (pos + candidate.size() > tokens.size()) continue;
        if (std::equal(candidate.begin() + 1, candidate.end(), tokens.begin() + static_cast<std::ptrdiff_t>(pos) + 1))
            return candidate.size();
    }
    return 0;
}

std::size_t TermMatcher::count(std::span<const std::string> tokens) const {
    std::size_t hits = 0;
    std::size_t pos = 0;
    while (pos < tokens.size()) {
        const std::size_t len = match_at(tokens, pos);
        if (len == 0) {
            ++pos;
        } else {
            ++hits;
            pos += len;
        }
    }
    return hits;
}

bool TermMatcher::any(std::span<const std::string> tokens) const {
    for (std::size_t pos = 0; pos < tokens.size(); ++pos)
        if (match_at(tokens, pos) != 0) return true;
    return false;
}

LexiconSet LexiconSet::from_lists(const std::map<Lexicon, std::vector<std::string>>& lists) {
    LexiconSet set;
    for (std::size_t i = 0; i < kLexiconCount; ++i) {
        const auto which = static_cast<Lexicon>(i);
        const std::string name(kNames[i]);
        const auto it = lists.find(which);
        if (it == lists.end()) throw DataError("lexicon list '" + name + "' missing");
        if (it->second.empty()) throw DataError("lexicon list '" + name + "' is empty");

        std::set<std::string> seen;
        auto& terms = set.terms_[i];
        for (const auto& raw : it->second) {
            std::string term = utf8::ascii_lower(trim(raw));
            if (term.empty()) throw DataError("lexicon list '" + name + "' contains an empty term");
            if (!seen.insert(term).second)
                throw DataError("lexicon list '" + name + "' contains duplicate term '" + term + "'");
            if (which != Lexicon::money_entity_patterns && lexical_tokens(std::string_view(term)).empty())
                throw DataError("lexicon list '" + name + "' term '" + term + "' has no word characters");
            terms.push_back(std::move(term));
        }
        if (which == Lexicon::money_entity_patterns) {
            for (const auto& pattern : terms) {
                try {
                    set.money_patterns_.emplace_back(pattern, std::regex::ECMAScript | std::regex::optimize);
                } catch (const std::regex_error& e) {
                    throw DataError("lexicon list '" + name + "' has invalid pattern '" + pattern + "': " + e.what());
                }
            }
        } else {
            set.matchers_[i] = TermMatcher(terms);
        }
    }
    return set;
}

LexiconSet LexiconSet::load(const std::filesystem::path& directory) {
    std::map<Lexicon, std::vector<std::string>> lists;
    for (std::size_t i = 0; i < kLexiconCount; ++i)
        lists[static_cast<Lexicon>(i)] = read_list(directory / (std::string(kNames[i]) + ".txt"));
    return from_lists(lists);
}

std::size_t LexiconSet::count_money_entities(std::string_view lowered_text) const {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (const auto& pattern : money_patterns_) {
        using It = std::string_view::const_iterator;
        for (std::regex_iterator<It> it(lowered_text.begin(), lowered_text.end(), pattern), end; it != end; ++it) {
            const auto begin = static_cast<std::size_t>(it->position());
            const auto length = static_cast<std::size_t>(it->length());
            if (length > 0) spans.emplace_back(begin, begin + length);
        }
    }
    if (spans.empty()) return 0;
    std::sort(spans.begin(), spans.end());
    std::size_t count = 1;
    std::size_t reach = spans.front().second;
    for (std::size_t i = 1; i < spans.size(); ++i) {
        if (spans[i].first >= reach) ++count;
        reach = std::max(reach, spans[i].second);
    }
    return count;
}

}  // namespace becs
