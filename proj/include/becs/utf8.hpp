#pragma once

#include <string>
#include <string_view>

namespace becs::utf8 {

// Decodes UTF-8 into codepoints. Malformed sequences decode to U+FFFD, one
// per offending byte, so decoding never fails.
std::u32string decode(std::string_view bytes);

std::string encode(std::u32string_view codepoints);
void append(std::string& out, char32_t cp);

// "U+0430" / "u+430" -> 0x430. Throws std::invalid_argument on bad input.
char32_t parse_codepoint(std::string_view text);
std::string format_codepoint(char32_t cp);

// Unicode White_Space property.
bool is_space(char32_t cp);

// ASCII punctuation plus the common non-ASCII punctuation and currency
// blocks. Anything that is neither space nor punctuation is a word character.
bool is_punct(char32_t cp);

inline bool is_ascii_upper(char32_t cp) { return cp >= U'A' && cp <= U'Z'; }
inline bool is_ascii_lower(char32_t cp) { return cp >= U'a' && cp <= U'z'; }
inline bool is_ascii_alpha(char32_t cp) { return is_ascii_upper(cp) || is_ascii_lower(cp); }
inline bool is_ascii_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }
inline char32_t ascii_lower(char32_t cp) { return is_ascii_upper(cp) ? cp + 32 : cp; }

std::string ascii_lower(std::string_view text);

}  // namespace becs::utf8
