#pragma once

#include <memory>
#include <string>
#include <vector>

#include "becs/lexicon.hpp"
#include "becs/normalizer.hpp"
#include "becs/random.hpp"
#include "becs/utf8.hpp"

namespace becs::test {

inline std::string data_dir() { return BECS_TEST_DATA_DIR; }

inline const HomoglyphMap& shipped_map() {
    static const HomoglyphMap map = HomoglyphMap::load(data_dir() + "/homoglyphs.tsv");
    return map;
}

inline std::shared_ptr<const HomoglyphMap> shipped_map_ptr() {
    static const auto ptr = std::make_shared<const HomoglyphMap>(shipped_map());
    return ptr;
}

inline const LexiconSet& shipped_lexicons() {
    static const LexiconSet set = LexiconSet::load(data_dir() + "/lexicons");
    return set;
}

inline std::shared_ptr<const LexiconSet> shipped_lexicons_ptr() {
    static const auto ptr = std::make_shared<const LexiconSet>(shipped_lexicons());
    return ptr;
}

// Random UTF-8 text mixing ASCII words, whitespace, punctuation, mapped
// confusables, invisibles and unrelated non-ASCII codepoints.
class TextGen {
public:
    explicit TextGen(std::uint64_t seed, const HomoglyphMap& map = shipped_map()) : rng_(seed) {
        for (const auto& [cp, repl] : map.entries()) keys_.push_back(cp);
        invisibles_ = map.invisibles();
    }

    std::string ascii(std::size_t max_len) {
        static constexpr char kAlphabet[] =
            "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789     .,!?$:;-'\"\n\t";
        std::string s;
        const std::size_t n = rng_.below(max_len + 1);
        for (std::size_t i = 0; i < n; ++i) s.push_back(kAlphabet[rng_.below(sizeof kAlphabet - 1)]);
        return s;
    }

    std::string mixed(std::size_t max_len) {
        static constexpr char32_t kOther[] = {U'\u00E9', U'\u00FC', U'\u4E2D', U'\u00A0', U'\u2019', U'\u20AC',
                                              U'\U0001F600', U'\u0416', U'\u05D0', U'\u3002'};
        std::u32string s;
        const std::size_t n = rng_.below(max_len + 1);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t kind = rng_.below(10);
            if (kind < 5) s.push_back(static_cast<char32_t>(U'a' + rng_.below(26)));
            else if (kind == 5) s.push_back(U' ');
            else if (kind == 6) s.push_back(keys_[rng_.below(keys_.size())]);
            else if (kind == 7) s.push_back(invisibles_[rng_.below(invisibles_.size())]);
            else if (kind == 8) s.push_back(kOther[rng_.below(std::size(kOther))]);
            else s.push_back(static_cast<char32_t>(U'!' + rng_.below(15)));
        }
        return utf8::encode(s);
    }

    Rng& rng() { return rng_; }

private:
    Rng rng_;
    std::vector<char32_t> keys_;
    std::vector<char32_t> invisibles_;
};

}  // namespace becs::test
