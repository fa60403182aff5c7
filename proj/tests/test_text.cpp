#include <doctest.h>

#include "peirce/text.hpp"

using namespace peirce;

TEST_CASE("tokenize lowercases and splits on non-alphanumeric") {
    CHECK(text::tokenize("The cat chased the bird?") ==
          std::vector<std::string>{"the", "cat", "chased", "the", "bird"});
    CHECK(text::tokenize("don't stop") == std::vector<std::string>{"don", "stop"});
    CHECK(text::tokenize("") == std::vector<std::string>{});
    CHECK(text::tokenize("  \t\n ") == std::vector<std::string>{});
}

TEST_CASE("tokenize min_len filters short tokens") {
    CHECK(text::tokenize("A cat, a bird") == std::vector<std::string>{"cat", "bird"});
    CHECK(text::tokenize("A cat, a bird", 1) ==
          std::vector<std::string>{"a", "cat", "a", "bird"});
    CHECK(text::tokenize("S \\ T is set difference") ==
          std::vector<std::string>{"is", "set", "difference"});
}

TEST_CASE("porter stems match the 1980 paper examples") {
    // Expected values frozen from an independent rule-by-rule reference
    // implementation of the published algorithm.
    const std::pair<const char*, const char*> table[] = {
        {"caresses", "caress"}, {"ponies", "poni"},       {"ties", "ti"},
        {"caress", "caress"},   {"cats", "cat"},          {"feed", "feed"},
        {"agreed", "agre"},     {"plastered", "plaster"}, {"bled", "bled"},
        {"motoring", "motor"},  {"sing", "sing"},         {"conflated", "conflat"},
        {"troubled", "troubl"}, {"sized", "size"},        {"hopping", "hop"},
        {"tanned", "tan"},      {"falling", "fall"},      {"hissing", "hiss"},
        {"fizzed", "fizz"},     {"failing", "fail"},      {"filing", "file"},
        {"happy", "happi"},     {"sky", "sky"},           {"relational", "relat"},
        {"conditional", "condit"}, {"rational", "ration"}, {"valenci", "valenc"},
        {"hesitanci", "hesit"}, {"digitizer", "digit"},   {"revival", "reviv"},
        {"probate", "probat"},  {"rate", "rate"},         {"cease", "ceas"},
        {"controll", "control"}, {"roll", "roll"},        {"generalizations", "gener"},
        {"oscillators", "oscil"},
    };
    for (const auto& [word, stem] : table) {
        CAPTURE(word);
        CHECK(text::porter_stem(word) == stem);
    }
}

TEST_CASE("porter stems for pipeline vocabulary") {
    // Frozen from the same reference; these words carry the shipped fixtures.
    const std::pair<const char*, const char*> table[] = {
        {"perceived", "perceiv"},   {"threat", "threat"},   {"chased", "chase"},
        {"crying", "cry"},          {"infant", "infant"},   {"unhappy", "unhappi"},
        {"boils", "boil"},          {"degrees", "degre"},   {"learned", "learn"},
        {"trait", "trait"},         {"organism", "organ"},  {"offspring", "offspr"},
        {"genetic", "genet"},       {"inheritance", "inherit"}, {"acquired", "acquir"},
        {"characteristics", "characterist"}, {"explanation", "explan"},
    };
    for (const auto& [word, stem] : table) {
        CAPTURE(word);
        CHECK(text::porter_stem(word) == stem);
    }
}

TEST_CASE("porter leaves one- and two-letter words alone") {
    CHECK(text::porter_stem("a") == "a");
    CHECK(text::porter_stem("is") == "is");
    CHECK(text::porter_stem("by") == "by");
}

TEST_CASE("split_sentences on terminator plus whitespace or end") {
    CHECK(text::split_sentences("It rains. The ground is wet.") ==
          std::vector<std::string>{"It rains.", "The ground is wet."});
    CHECK(text::split_sentences("Really? Yes! Fine.") ==
          std::vector<std::string>{"Really?", "Yes!", "Fine."});
    // A dot not followed by whitespace is not a boundary.
    CHECK(text::split_sentences("Water boils at 99.9 degrees.") ==
          std::vector<std::string>{"Water boils at 99.9 degrees."});
    // Unterminated trailing text still counts as a sentence.
    CHECK(text::split_sentences("First. second half") ==
          std::vector<std::string>{"First.", "second half"});
    CHECK(text::split_sentences("") == std::vector<std::string>{});
    CHECK(text::split_sentences("   ") == std::vector<std::string>{});
}

TEST_CASE("default stopwords cover function words only") {
    const auto& sw = text::default_stopwords();
    CHECK(sw.count("the"));
    CHECK(sw.count("a"));
    CHECK(sw.count("if"));
    CHECK(sw.count("then"));
    CHECK(sw.count("therefore"));
    CHECK(!sw.count("cat"));
    CHECK(!sw.count("water"));
}

TEST_CASE("concept_set normalises, filters and stems") {
    // Oracle: hand tokenisation + frozen stems with the shipped stopword list.
    CHECK(text::concept_set("The bird perceived a threat.") ==
          std::set<std::string>{"bird", "perceiv", "threat"});
    CHECK(text::concept_set("The cat chased the bird?") ==
          std::set<std::string>{"cat", "chase", "bird"});
    CHECK(text::concept_set("the a of") == std::set<std::string>{});
    CHECK(text::concept_set("") == std::set<std::string>{});
}

TEST_CASE("jaccard") {
    using S = std::set<std::string>;
    CHECK(text::jaccard(S{}, S{}) == doctest::Approx(1.0));
    CHECK(text::jaccard(S{"a"}, S{}) == doctest::Approx(0.0));
    CHECK(text::jaccard(S{"a", "b"}, S{"b", "c"}) == doctest::Approx(1.0 / 3.0));
    CHECK(text::jaccard(S{"x"}, S{"x"}) == doctest::Approx(1.0));
}
