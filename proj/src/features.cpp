#include "becs/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "becs/utf8.hpp"

namespace becs {

namespace {

constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "authority_count",     "scarcity_count",       "reciprocity_count",  "urgency_count",
    "urgency_density",     "financial_keyword_count", "tech_threat_count", "second_person_count",
    "persuasion_cue_total", "authority_density",   "financial_density",  "cue_diversity",
    "hedge_count",         "booster_count",        "exclusive_word_count", "first_person_count",
    "sentence_count",      "avg_sentence_length",  "type_token_ratio",   "polarity",
    "subjectivity",        "positive_ratio",       "negative_ratio",     "sentiment_delta",
    "psi_score",           "caps_ratio",           "url_count",          "punctuation_density",
    "word_count",          "char_count",           "avg_word_length",    "complex_word_ratio",
    "ent_money_count",     "digit_ratio",          "obfuscation_count",
};

const std::unordered_set<std::string> kSecondPerson = {"you", "your", "yours", "yourself", "yourselves"};
const std::unordered_set<std::string> kFirstPerson = {"i",  "me", "my",   "mine", "myself",
                                                      "we", "us", "our",  "ours", "ourselves"};

double ratio(double num, double den) { return den > 0.0 ? std::min(1.0, num / den) : 0.0; }

double polarity_of(double pos, double neg) { return pos + neg > 0.0 ? (pos - neg) / (pos + neg) : 0.0; }

bool is_sentence_end(char32_t cp) { return cp == U'.' || cp == U'!' || cp == U'?'; }

bool is_vowel(char32_t cp) {
    switch (cp) {
        case U'a':
        case U'e':
        case U'i':
        case U'o':
        case U'u':
        case U'y':
            return true;
        default:
            return false;
    }
}

// Syllables approximated by counting vowel groups among ASCII letters.
std::size_t vowel_groups(std::u32string_view word) {
    std::size_t groups = 0;
    bool in_group = false;
    for (char32_t cp : word) {
        if (!utf8::is_ascii_alpha(cp)) continue;
        const bool vowel = is_vowel(utf8::ascii_lower(cp));
        if (vowel && !in_group) ++groups;
        in_group = vowel;
    }
    return groups;
}

std::vector<std::u32string_view> whitespace_words(std::u32string_view text) {
    std::vector<std::u32string_view> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && utf8::is_space(text[i])) ++i;
        const std::size_t start = i;
        while (i < text.size() && !utf8::is_space(text[i])) ++i;
        if (i > start) words.push_back(text.substr(start, i - start));
    }
    return words;
}

std::size_t count_sentences(std::u32string_view text) {
    std::size_t sentences = 0;
    bool has_content = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char32_t cp = text[i];
        if (is_sentence_end(cp)) {
            const bool boundary = i + 1 == text.size() || utf8::is_space(text[i + 1]) || is_sentence_end(text[i + 1]);
            if (boundary && has_content) {
                ++sentences;
                has_content = false;
            }
        } else if (!utf8::is_space(cp) && !utf8::is_punct(cp)) {
            has_content = true;
        }
    }
    return sentences + (has_content ? 1 : 0);
}

bool looks_like_url(std::u32string_view word) {
    std::string lowered;
    for (char32_t cp : word) utf8::append(lowered, utf8::ascii_lower(cp));
    return lowered.find("http://") != std::string::npos || lowered.find("https://") != std::string::npos ||
           lowered.rfind("www.", 0) == 0;
}

}  // namespace

std::string_view feature_name(Feature f) { return kFeatureNames[static_cast<std::size_t>(f)]; }

std::optional<Feature> feature_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kFeatureCount; ++i)
        if (kFeatureNames[i] == name) return static_cast<Feature>(i);
    return std::nullopt;
}

std::uint64_t feature_schema_hash() {
    static const std::uint64_t hash = [] {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            for (char c : kFeatureNames[i]) {
                h ^= static_cast<unsigned char>(c);
                h *= 0x100000001b3ULL;
            }
            h ^= static_cast<unsigned char>('\n');
            h *= 0x100000001b3ULL;
        }
        return h;
    }();
    return hash;
}

bool is_ratio_feature(Feature f) {
    switch (f) {
        case Feature::urgency_density:
        case Feature::authority_density:
        case Feature::financial_density:
        case Feature::type_token_ratio:
        case Feature::subjectivity:
        case Feature::positive_ratio:
        case Feature::negative_ratio:
        case Feature::caps_ratio:
        case Feature::punctuation_density:
        case Feature::complex_word_ratio:
        case Feature::digit_ratio:
            return true;
        default:
            return false;
    }
}

double smiling_assassin(double s_pos, double u_freq, double alpha, double beta) {
    if (!(alpha > 0.0)) throw std::invalid_argument("smiling_assassin: alpha must be positive");
    if (!(beta > 0.0)) throw std::invalid_argument("smiling_assassin: beta must be positive");
    const double z = alpha * s_pos * std::log1p(beta * u_freq);
    return 1.0 / (1.0 + std::exp(-z));
}

std::size_t word_count(std::string_view text) { return whitespace_words(utf8::decode(text)).size(); }

FeatureVector extract_features(const NormalizedText& norm, const LexiconSet& lexicons, const PsiParams& psi) {
    FeatureVector fv;
    fv[Feature::obfuscation_count] = static_cast<double>(norm.substitutions + norm.invisibles_removed);

    const std::u32string text = utf8::decode(norm.text);
    const auto words = whitespace_words(text);
    if (words.empty()) {
        fv[Feature::psi_score] = smiling_assassin(0.0, 0.0, psi.alpha, psi.beta);
        return fv;
    }

    const auto tokens = lexical_tokens(std::u32string_view(text));
    const auto hits = [&](Lexicon which) {
        return static_cast<double>(lexicons.matcher(which).count(tokens));
    };
    const double n_words = static_cast<double>(words.size());

    const double urgency = hits(Lexicon::urgency);
    const double authority = hits(Lexicon::authority);
    const double scarcity = hits(Lexicon::scarcity);
    const double reciprocity = hits(Lexicon::reciprocity);
    const double financial = hits(Lexicon::financial_keywords);
    const double tech = hits(Lexicon::tech_threat_keywords);
    const double pos = hits(Lexicon::positive_sentiment);
    const double neg = hits(Lexicon::negative_sentiment);

    double second_person = 0, first_person = 0;
    for (const auto& t : tokens) {
        if (kSecondPerson.count(t)) ++second_person;
        if (kFirstPerson.count(t)) ++first_person;
    }

    fv[Feature::authority_count] = authority;
    fv[Feature::scarcity_count] = scarcity;
    fv[Feature::reciprocity_count] = reciprocity;
    fv[Feature::urgency_count] = urgency;
    fv[Feature::urgency_density] = ratio(urgency, n_words);
    fv[Feature::financial_keyword_count] = financial;
    fv[Feature::tech_threat_count] = tech;
    fv[Feature::second_person_count] = second_person;
    fv[Feature::persuasion_cue_total] = authority + scarcity + reciprocity + urgency;
    fv[Feature::authority_density] = ratio(authority, n_words);
    fv[Feature::financial_density] = ratio(financial, n_words);
    fv[Feature::cue_diversity] = (urgency > 0) + (authority > 0) + (scarcity > 0) + (reciprocity > 0) +
                                 (financial > 0) + (tech > 0);

    fv[Feature::hedge_count] = hits(Lexicon::hedges);
    fv[Feature::booster_count] = hits(Lexicon::boosters);
    fv[Feature::exclusive_word_count] = hits(Lexicon::exclusive_words);
    fv[Feature::first_person_count] = first_person;
    const double sentences = static_cast<double>(std::max<std::size_t>(1, count_sentences(text)));
    fv[Feature::sentence_count] = sentences;
    fv[Feature::avg_sentence_length] = n_words / sentences;
    if (!tokens.empty()) {
        const std::unordered_set<std::string> unique(tokens.begin(), tokens.end());
        fv[Feature::type_token_ratio] = static_cast<double>(unique.size()) / static_cast<double>(tokens.size());
    }

    fv[Feature::polarity] = polarity_of(pos, neg);
    fv[Feature::subjectivity] = ratio(pos + neg, n_words);
    fv[Feature::positive_ratio] = pos + neg > 0 ? pos / (pos + neg) : 0.0;
    fv[Feature::negative_ratio] = pos + neg > 0 ? neg / (pos + neg) : 0.0;
    {
        const std::size_t third = tokens.size() / 3;
        if (third > 0) {
            const std::span<const std::string> all(tokens);
            const auto head = all.first(third);
            const auto tail = all.last(third);
            const auto& pm = lexicons.matcher(Lexicon::positive_sentiment);
            const auto& nm = lexicons.matcher(Lexicon::negative_sentiment);
            const double head_pol = polarity_of(static_cast<double>(pm.count(head)), static_cast<double>(nm.count(head)));
            const double tail_pol = polarity_of(static_cast<double>(pm.count(tail)), static_cast<double>(nm.count(tail)));
            fv[Feature::sentiment_delta] = tail_pol - head_pol;
        }
    }
    fv[Feature::psi_score] =
        smiling_assassin(fv[Feature::positive_ratio], fv[Feature::urgency_density], psi.alpha, psi.beta);

    double upper = 0, letters = 0, punct = 0, digits = 0;
    for (char32_t cp : text) {
        if (utf8::is_ascii_alpha(cp)) {
            ++letters;
            if (utf8::is_ascii_upper(cp)) ++upper;
        } else if (utf8::is_ascii_digit(cp)) {
            ++digits;
        } else if (utf8::is_punct(cp)) {
            ++punct;
        }
    }
    const double n_chars = static_cast<double>(text.size());
    double url = 0, word_chars = 0, complex_words = 0;
    for (const auto& w : words) {
        if (looks_like_url(w)) ++url;
        word_chars += static_cast<double>(w.size());
        if (vowel_groups(w) >= 3) ++complex_words;
    }

    fv[Feature::caps_ratio] = ratio(upper, letters);
    fv[Feature::url_count] = url;
    fv[Feature::punctuation_density] = ratio(punct, n_chars);
    fv[Feature::word_count] = n_words;
    fv[Feature::char_count] = n_chars;
    fv[Feature::avg_word_length] = word_chars / n_words;
    fv[Feature::complex_word_ratio] = ratio(complex_words, n_words);
    fv[Feature::ent_money_count] = static_cast<double>(lexicons.count_money_entities(utf8::ascii_lower(norm.text)));
    fv[Feature::digit_ratio] = ratio(digits, n_chars);
    return fv;
}

}  // namespace becs
