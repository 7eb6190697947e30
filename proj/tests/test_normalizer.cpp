#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "becs/error.hpp"
#include "becs/normalizer.hpp"
#include "support.hpp"

using namespace becs;
using becs::test::shipped_map;

namespace {

std::size_t codepoints(std::string_view s) { return utf8::decode(s).size(); }

}  // namespace

TEST_CASE("map construction from explicit pairs") {
    const auto map = HomoglyphMap::from_entries({{U'\u0430', U"a"}, {U'\u0435', U"e"}});
    CHECK(map.size() == 2);
    CHECK(*map.lookup(U'\u0430') == U"a");
    CHECK(map.lookup(U'a') == nullptr);
    CHECK(map.is_invisible(U'\u200B'));
}

TEST_CASE("a replacement that is itself a key is rejected") {
    CHECK_THROWS_AS(HomoglyphMap::from_entries({{U'\u0430', U"\u0430"}}), DataError);
    CHECK_THROWS_AS(HomoglyphMap::from_entries({{U'\u0430', U"a"}, {U'\u0435', U"x\u0430"}}), DataError);
}

TEST_CASE("other malformed tables are rejected") {
    CHECK_THROWS_AS(HomoglyphMap::from_entries({}), DataError);
    CHECK_THROWS_AS(HomoglyphMap::from_entries({{U'a', U"b"}}), DataError);
    CHECK_THROWS_AS(HomoglyphMap::from_entries({{U'\u0430', U""}}), DataError);
    CHECK_THROWS_AS(HomoglyphMap::from_entries({{U'\u0430', U"a"}, {U'\u0430', U"o"}}), DataError);
    CHECK_THROWS_AS(HomoglyphMap::from_entries({{U'\u200B', U"a"}}), DataError);
    CHECK_THROWS_AS(HomoglyphMap::from_entries({{U'\u0430', U"a\u200B"}}), DataError);
    CHECK_THROWS_AS(HomoglyphMap::parse("U+0430\n"), DataError);
    CHECK_THROWS_AS(HomoglyphMap::parse("U+04ZZ\ta\n"), DataError);
    CHECK_THROWS_AS(HomoglyphMap::parse("INVISIBLE\tU+0041\nU+0430\ta\n"), DataError);
}

TEST_CASE("table file format") {
    const auto map = HomoglyphMap::parse("# comment\nU+0430\ta\n\nU+FB01\tfi\nINVISIBLE\tU+200B\n");
    CHECK(map.size() == 2);
    CHECK(*map.lookup(U'\uFB01') == U"fi");
    CHECK(map.is_invisible(U'\u200B'));
    CHECK_FALSE(map.is_invisible(U'\uFEFF'));  // explicit INVISIBLE rows replace the default set

    const auto defaults = HomoglyphMap::parse("U+0430\ta\n");
    CHECK(defaults.invisibles() == HomoglyphMap::default_invisibles());
}

TEST_CASE("missing table file") {
    CHECK_THROWS_AS(HomoglyphMap::load("/nonexistent/homoglyphs.tsv"), DataError);
}

TEST_CASE("shipped table covers the core Cyrillic lookalikes") {
    const auto& map = shipped_map();
    for (const auto& [cp, latin] : std::vector<std::pair<char32_t, char32_t>>{
             {U'\u0430', U'a'}, {U'\u0435', U'e'}, {U'\u043E', U'o'},
             {U'\u0440', U'p'}, {U'\u0441', U'c'}, {U'\u0445', U'x'}}) {
        CAPTURE(utf8::format_codepoint(cp));
        REQUIRE(map.lookup(cp) != nullptr);
        CHECK(*map.lookup(cp) == std::u32string(1, latin));
    }
    for (char32_t inv : HomoglyphMap::default_invisibles()) {
        CHECK(map.is_invisible(inv));
        CHECK_FALSE(map.contains(inv));
    }
}

TEST_CASE("shipped table is cascade-free") {
    const auto& map = shipped_map();
    for (const auto& [cp, repl] : map.entries())
        for (char32_t c : repl) {
            CHECK_FALSE(map.contains(c));
            CHECK_FALSE(map.is_invisible(c));
        }
}

TEST_CASE("normalize examples") {
    const auto& map = shipped_map();

    auto r = normalize("B\u0430nk", map);
    CHECK(r.text == "Bank");
    CHECK(r.substitutions == 1);
    CHECK(r.invisibles_removed == 0);

    r = normalize("", map);
    CHECK(r.text.empty());
    CHECK(r.substitutions == 0);
    CHECK(r.invisibles_removed == 0);

    r = normalize("phon\u0435", map);
    CHECK(r.text == "phone");
    CHECK(r.substitutions == 1);

    r = normalize("pay\u200Bment", map);
    CHECK(r.text == "payment");
    CHECK(r.invisibles_removed == 1);
    CHECK(r.substitutions == 0);
}

TEST_CASE("multi-character replacements and untouched codepoints") {
    const auto& map = shipped_map();
    auto r = normalize("\uFB01nance caf\u00E9 \u4E2D", map);
    CHECK(r.text == "finance caf\u00E9 \u4E2D");
    CHECK(r.substitutions == 1);
}

TEST_CASE("malformed UTF-8 becomes replacement characters") {
    const auto r = normalize(std::string("a\xFF\xFE" "b"), shipped_map());
    CHECK(r.text == "a\uFFFD\uFFFDb");
}

TEST_CASE("passthrough keeps text and reports no evidence") {
    const auto r = passthrough("B\u0430nk\u200B");
    CHECK(r.text == "B\u0430nk\u200B");
    CHECK(r.substitutions == 0);
    CHECK(r.invisibles_removed == 0);
}

TEST_CASE("property: output is free of keys and invisibles and idempotent") {
    const auto& map = shipped_map();
    test::TextGen gen(101);
    for (int i = 0; i < 2000; ++i) {
        const std::string text = gen.mixed(60);
        const auto once = normalize(text, map);
        for (char32_t c : utf8::decode(once.text)) {
            REQUIRE_FALSE(map.contains(c));
            REQUIRE_FALSE(map.is_invisible(c));
        }
        const auto twice = normalize(once.text, map);
        REQUIRE(twice.text == once.text);
        REQUIRE(twice.substitutions == 0);
        REQUIRE(twice.invisibles_removed == 0);
    }
}

TEST_CASE("property: codepoint length accounting") {
    const auto& map = shipped_map();
    test::TextGen gen(202);
    for (int i = 0; i < 2000; ++i) {
        const std::string text = gen.mixed(60);
        // Oracle: walk the input independently and sum per-substitution deltas.
        long delta = 0;
        std::size_t subs = 0, invis = 0;
        for (char32_t c : utf8::decode(text)) {
            if (const auto* repl = map.lookup(c)) {
                delta += static_cast<long>(repl->size()) - 1;
                ++subs;
            } else if (map.is_invisible(c)) {
                ++invis;
            }
        }
        const auto r = normalize(text, map);
        REQUIRE(r.substitutions == subs);
        REQUIRE(r.invisibles_removed == invis);
        REQUIRE(static_cast<long>(codepoints(r.text)) ==
                static_cast<long>(codepoints(text)) - static_cast<long>(invis) + delta);
    }
}

TEST_CASE("property: clean ASCII is the identity") {
    const auto& map = shipped_map();
    test::TextGen gen(303);
    for (int i = 0; i < 2000; ++i) {
        const std::string text = gen.ascii(80);
        const auto r = normalize(text, map);
        REQUIRE(r.text == text);
        REQUIRE(r.substitutions == 0);
        REQUIRE(r.invisibles_removed == 0);
    }
}

TEST_CASE("load from a file on disk") {
    const auto path = std::filesystem::temp_directory_path() / "becs_test_map.tsv";
    {
        std::ofstream out(path);
        out << "U+0430\ta\nINVISIBLE\tU+200B\n";
    }
    const auto map = HomoglyphMap::load(path);
    CHECK(map.size() == 1);
    std::filesystem::remove(path);
}
