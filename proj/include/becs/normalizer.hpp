#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace becs {

// Confusable-character table: source codepoint -> canonical replacement,
// plus the set of invisible codepoints that normalization drops.
//
// Construction validates that applying the map once is enough: no
// replacement may contain a key or an invisible codepoint, so the output of
// normalize() is a fixed point. Keys and invisibles must be non-ASCII, which
// keeps clean ASCII text untouched. Immutable once built.
class HomoglyphMap {
public:
    using Entry = std::pair<char32_t, std::u32string>;

    static HomoglyphMap from_entries(const std::vector<Entry>& entries,
                                     const std::vector<char32_t>& invisibles = default_invisibles());

    // Map file: `U+XXXX<TAB>replacement` rows, `INVISIBLE<TAB>U+XXXX` rows,
    // `#` comments. When the file declares no INVISIBLE rows the default
    // zero-width set is used.
    static HomoglyphMap parse(std::string_view text, std::string_view origin = "<memory>");
    static HomoglyphMap load(const std::filesystem::path& path);

    // U+200B, U+200C, U+200D, U+2060, U+FEFF.
    static std::vector<char32_t> default_invisibles();

    const std::u32string* lookup(char32_t cp) const {
        const auto it = entries_.find(cp);
        return it == entries_.end() ? nullptr : &it->second;
    }
    bool contains(char32_t cp) const { return entries_.count(cp) != 0; }
    bool is_invisible(char32_t cp) const { return invisibles_.count(cp) != 0; }

    std::size_t size() const { return entries_.size(); }

    // Entries sorted by source codepoint.
    std::vector<Entry> entries() const;
    std::vector<char32_t> invisibles() const;

private:
    HomoglyphMap() = default;

    std::unordered_map<char32_t, std::u32string> entries_;
    std::unordered_set<char32_t> invisibles_;
};

struct NormalizedText {
    std::string text;
    std::size_t substitutions = 0;
    std::size_t invisibles_removed = 0;
};

// Single left-to-right pass: mapped characters are replaced, invisible
// characters dropped, everything else copied. Malformed UTF-8 bytes come out
// as U+FFFD.
NormalizedText normalize(std::string_view text, const HomoglyphMap& map);

// Wraps text as if normalized, with zero counts. Used for pipelines that run
// with normalization switched off.
NormalizedText passthrough(std::string_view text);

}  // namespace becs
