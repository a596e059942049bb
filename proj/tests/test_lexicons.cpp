#include <string>

#include "doctest.h"
#include "stylo/error.hpp"
#include "stylo/lexicons.hpp"
#include "support/fixtures.hpp"

using namespace stylo;

namespace {

ProcessedDoc process(std::string_view text) { return fixtures::processor().process(text); }

const Lexicon& lex(LexiconCategory c) { return fixtures::lexicons().get(c); }

}  // namespace

TEST_CASE("lexicon files: comments, case folding, empty file") {
    const auto dir = fixtures::scratch_dir("lexicons");
    fixtures::write_file(dir / "a.txt", "may\nmight\n# comment\n");
    CHECK(Lexicon::load(dir / "a.txt", LexiconCategory::hedge, MatchMode::surface).size() == 2);

    fixtures::write_file(dir / "b.txt", "May\nmay\n  In   General \n");
    const auto b = Lexicon::load(dir / "b.txt", LexiconCategory::hedge, MatchMode::surface);
    CHECK(b.size() == 2);
    CHECK(b.contains("in general"));

    fixtures::write_file(dir / "c.txt", "# only a comment\n\n");
    CHECK_THROWS_AS(Lexicon::load(dir / "c.txt", LexiconCategory::hedge, MatchMode::surface), ValidationError);
    CHECK_THROWS_AS(Lexicon::load(dir / "missing.txt", LexiconCategory::hedge, MatchMode::surface), Error);
}

TEST_CASE("bundled lexicon sizes and match modes") {
    CHECK(lex(LexiconCategory::hedge).size() >= 90);
    CHECK(lex(LexiconCategory::booster).size() >= 80);
    CHECK(lex(LexiconCategory::hype).size() >= 120);
    CHECK(lex(LexiconCategory::hype).mode() == MatchMode::lemma);
    CHECK(lex(LexiconCategory::hedge).mode() == MatchMode::surface);
    CHECK(lex(LexiconCategory::booster).mode() == MatchMode::surface);
    for (auto c : kConnectiveCategories) CHECK(lex(c).size() > 0);
    CHECK(parse_category("connective_causal") == LexiconCategory::connective_causal);
    CHECK_FALSE(parse_category("nope").has_value());
}

TEST_CASE("longest-first non-overlapping matching") {
    const Lexicon l(LexiconCategory::hedge, MatchMode::surface, {"in general", "general"});
    const auto m = match_count(process("in general, general methods"), l);
    CHECK(m.count == 2);
    const auto matches = l.find_matches(process("in general, general methods"));
    REQUIRE(matches.size() == 2);
    CHECK(matches[0].length == 2);
    CHECK(matches[1].length == 1);
}

TEST_CASE("density per 100 word tokens") {
    const Lexicon l(LexiconCategory::hedge, MatchMode::surface, {"may"});
    std::string text = "may may";
    for (int i = 0; i < 48; ++i) text += " word";
    const auto m = match_count(process(text + "."), l);
    CHECK(m.count == 2);
    CHECK(m.density == doctest::Approx(4.0));

    const auto none = match_count(process("Nothing here."), l);
    CHECK(none.count == 0);
    CHECK(none.density == 0.0);
    CHECK(match_count(process(""), l).density == 0.0);
}

TEST_CASE("hbh vector order and spot values") {
    const auto& h = lex(LexiconCategory::hedge);
    const auto& b = lex(LexiconCategory::booster);
    const auto& y = lex(LexiconCategory::hype);
    const auto zero = hbh_features(process("The cat sat on the mat."), h, b, y);
    CHECK(zero == std::array<double, 3>{0, 0, 0});

    std::string text = "perhaps";
    for (int i = 0; i < 99; ++i) text += " cat";
    const auto one = hbh_features(process(text), h, b, y);
    CHECK(one[0] == doctest::Approx(1.0));
    CHECK(one[1] == 0.0);
    CHECK(one[2] == 0.0);
}

TEST_CASE("hype matches on lemmas") {
    const auto& y = lex(LexiconCategory::hype);
    CHECK(match_count(process("Novel methods and innovations."), y).count == 2);
}

TEST_CASE("mini-corpus document 7 matches a hand count") {
    // hedges: roughly, seems, mostly; boosters: never, obvious; no hype lemma.
    // 71 word tokens (numerals and punctuation excluded).
    const auto& d = fixtures::mini_corpus().documents.at(6);
    REQUIRE(d.id == "mini-04-h");
    const auto doc = process(d.abstract);
    CHECK(doc.word_count() == 71);
    const auto v = hbh_features(doc, lex(LexiconCategory::hedge), lex(LexiconCategory::booster),
                                lex(LexiconCategory::hype));
    CHECK(v[0] == doctest::Approx(300.0 / 71.0).epsilon(1e-12));
    CHECK(v[1] == doctest::Approx(200.0 / 71.0).epsilon(1e-12));
    CHECK(v[2] == 0.0);
}

TEST_CASE("densities survive doubling and counts stay below word count") {
    const auto& h = lex(LexiconCategory::hedge);
    const auto& b = lex(LexiconCategory::booster);
    const auto& y = lex(LexiconCategory::hype);
    for (const auto& d : fixtures::mini_corpus().documents) {
        const auto once = process(d.abstract);
        const auto twice = process(d.abstract + " " + d.abstract);
        const auto a = hbh_features(once, h, b, y);
        const auto c = hbh_features(twice, h, b, y);
        for (int i = 0; i < 3; ++i) CHECK(c[i] == doctest::Approx(a[i]).epsilon(1e-12));
        for (auto cat : {LexiconCategory::hedge, LexiconCategory::booster, LexiconCategory::hype,
                         LexiconCategory::stopword, LexiconCategory::connective_additive}) {
            CHECK(match_count(once, lex(cat)).count <= once.word_count());
        }
    }
}
