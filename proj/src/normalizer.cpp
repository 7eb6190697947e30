#include "becs/normalizer.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "becs/error.hpp"
#include "becs/utf8.hpp"

namespace becs {

namespace {

std::string where(std::string_view origin, std::size_t line) {
    return std::string(origin) + ":" + std::to_string(line) + ": ";
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::vector<char32_t> HomoglyphMap::default_invisibles() { return {0x200B, 0x200C, 0x200D, 0x2060, 0xFEFF}; }

HomoglyphMap HomoglyphMap::from_entries(const std::vector<Entry>& entries, const std::vector<char32_t>& invisibles) {
    if (entries.empty()) throw DataError("homoglyph map: table is empty");

    HomoglyphMap map;
    for (char32_t cp : invisibles) {
        if (cp < 0x80) throw DataError("homoglyph map: ASCII codepoint " + utf8::format_codepoint(cp) + " cannot be invisible");
        map.invisibles_.insert(cp);
    }
    for (const auto& [source, replacement] : entries) {
        if (source < 0x80)
            throw DataError("homoglyph map: ASCII source codepoint " + utf8::format_codepoint(source));
        if (replacement.empty())
            throw DataError("homoglyph map: empty replacement for " + utf8::format_codepoint(source));
        if (map.invisibles_.count(source))
            throw DataError("homoglyph map: " + utf8::format_codepoint(source) + " is both mapped and invisible");
        if (!map.entries_.emplace(source, replacement).second)
            throw DataError("homoglyph map: duplicate source codepoint " + utf8::format_codepoint(source));
    }
    for (const auto& [source, replacement] : map.entries_) {
        for (char32_t cp : replacement) {
            if (map.entries_.count(cp))
                throw DataError("homoglyph map: replacement for " + utf8::format_codepoint(source) +
                                " contains mapped codepoint " + utf8::format_codepoint(cp));
            if (map.invisibles_.count(cp))
                throw DataError("homoglyph map: replacement for " + utf8::format_codepoint(source) +
                                " contains invisible codepoint " + utf8::format_codepoint(cp));
        }
    }
    return map;
}

HomoglyphMap HomoglyphMap::parse(std::string_view text, std::string_view origin) {
    std::vector<Entry> entries;
    std::vector<char32_t> invisibles;
    bool declared_invisibles = false;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = std::min(text.find('\n', pos), text.size());
        const std::string_view raw = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;

        const std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;

        const std::size_t tab = line.find('\t');
        if (tab == std::string_view::npos) throw DataError(where(origin, line_no) + "expected two tab-separated columns");
        const std::string_view key = trim(line.substr(0, tab));
        // The replacement column is taken verbatim up to the line end so a
        // replacement may itself be whitespace-sensitive.
        std::string_view value = raw.substr(raw.find('\t') + 1);
        while (!value.empty() && value.back() == '\r') value.remove_suffix(1);

        try {
            if (key == "INVISIBLE") {
                invisibles.push_back(utf8::parse_codepoint(trim(value)));
                declared_invisibles = true;
            } else {
                if (value.empty()) throw DataError(where(origin, line_no) + "empty replacement");
                entries.emplace_back(utf8::parse_codepoint(key), utf8::decode(value));
            }
        } catch (const std::invalid_argument& e) {
            throw DataError(where(origin, line_no) + e.what());
        }
    }
    return from_entries(entries, declared_invisibles ? invisibles : default_invisibles());
}

HomoglyphMap HomoglyphMap::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open homoglyph map " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.string());
}

std::vector<HomoglyphMap::Entry> HomoglyphMap::entries() const {
    std::vector<Entry> out(entries_.begin(), entries_.end());
    std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) { return a.first < b.first; });
    return out;
}

std::vector<char32_t> HomoglyphMap::invisibles() const {
    std::vector<char32_t> out(invisibles_.begin(), invisibles_.end());
    std::sort(out.begin(), out.end());
    return out;
}

NormalizedText normalize(std::string_view text, const HomoglyphMap& map) {
    NormalizedText out;
    out.text.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        // ASCII is never mapped or invisible; copy runs of it directly.
        const std::size_t start = i;
        while (i < text.size() && static_cast<unsigned char>(text[i]) < 0x80) ++i;
        out.text.append(text.substr(start, i - start));
        if (i == text.size()) break;

        std::size_t end = i;
        while (end < text.size() && static_cast<unsigned char>(text[end]) >= 0x80) ++end;
        for (char32_t cp : utf8::decode(text.substr(i, end - i))) {
            if (const auto* replacement = map.lookup(cp)) {
                for (char32_t r : *replacement) utf8::append(out.text, r);
                ++out.substitutions;
            } else if (map.is_invisible(cp)) {
                ++out.invisibles_removed;
            } else {
                utf8::append(out.text, cp);
            }
        }
        i = end;
    }
    return out;
}

NormalizedText passthrough(std::string_view text) { return NormalizedText{std::string(text), 0, 0}; }

}  // namespace becs
