#include "forge/simtext.hpp"

#include "forge/errors.hpp"
#include "forge/rng.hpp"
#include "support/helpers.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <fstream>

using namespace forge;

namespace {

// Seeded generator for property corpora.
std::string random_text(Rng& rng, std::size_t max_len, std::string_view alphabet) {
    const std::size_t len = rng.below(max_len + 1);
    std::string out;
    for (std::size_t i = 0; i < len; ++i) {
        out.push_back(alphabet[rng.below(alphabet.size())]);
    }
    return out;
}

}  // namespace

TEST_SUITE_BEGIN("simtext");

TEST_CASE("gestalt ratio basics") {
    CHECK(simtext::gestalt_ratio("abc", "abc") == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(simtext::gestalt_ratio("abc", "xyz") == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(simtext::gestalt_ratio("abcd", "bcde") == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(simtext::gestalt_ratio("", "") == 1.0);
    CHECK(simtext::gestalt_ratio("", "abc") == 0.0);
}

TEST_CASE("levenshtein basics") {
    CHECK(simtext::levenshtein("", "abc") == 3);
    CHECK(simtext::levenshtein("kitten", "sitting") == 3);
    CHECK(simtext::levenshtein("x", "x") == 0);
    CHECK(simtext::levenshtein("中日", "中") == 1);  // code points, not bytes
}

TEST_CASE("frozen reference corpus: ratio to 1e-12, distance exact") {
    std::ifstream in(testsupport::data_file("simtext_reference.jsonl"));
    REQUIRE(in.good());
    std::string line;
    std::size_t pairs = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto row = nlohmann::json::parse(line);
        const std::string a = row["a"].get<std::string>();
        const std::string b = row["b"].get<std::string>();
        const double expected_ratio = std::stod(row["ratio"].get<std::string>());
        const std::size_t expected_lev = row["lev"].get<std::size_t>();
        CHECK(std::abs(simtext::gestalt_ratio(a, b) - expected_ratio) <= 1e-12);
        CHECK(simtext::levenshtein(a, b) == expected_lev);
        ++pairs;
    }
    CHECK(pairs == 200);
}

TEST_CASE("gestalt agrees with the in-test matcher port on random pairs") {
    Rng rng(2024);
    for (int i = 0; i < 300; ++i) {
        const auto alphabet = i % 2 == 0 ? "ab" : "abcdefgh ";
        const std::string a = random_text(rng, 30, alphabet);
        const std::string b = random_text(rng, 30, alphabet);
        CHECK(std::abs(simtext::gestalt_ratio(a, b) - testsupport::gestalt_oracle(a, b)) <=
              1e-12);
    }
}

TEST_CASE("gestalt ratio is symmetric and 1 only on equal strings") {
    Rng rng(77);
    for (int i = 0; i < 500; ++i) {
        const std::string a = random_text(rng, 24, "ab");
        const std::string b = random_text(rng, 24, "ab");
        const double r1 = simtext::gestalt_ratio(a, b);
        const double r2 = simtext::gestalt_ratio(b, a);
        CHECK(r1 == r2);
        if (a == b) {
            CHECK(r1 == 1.0);
        } else {
            CHECK(r1 < 1.0);
        }
    }
}

TEST_CASE("levenshtein metric properties") {
    Rng rng(99);
    for (int i = 0; i < 200; ++i) {
        const std::string a = random_text(rng, 16, "abc");
        const std::string b = random_text(rng, 16, "abc");
        const std::string c = random_text(rng, 16, "abc");
        const std::size_t ab = simtext::levenshtein(a, b);
        const std::size_t ba = simtext::levenshtein(b, a);
        const std::size_t bc = simtext::levenshtein(b, c);
        const std::size_t ac = simtext::levenshtein(a, c);
        CHECK(ab == ba);
        CHECK((ab == 0) == (a == b));
        CHECK(ac <= ab + bc);
        const std::size_t la = a.size(), lb = b.size();
        CHECK(ab >= (la > lb ? la - lb : lb - la));
        CHECK(ab <= std::max(la, lb));
        CHECK(ab == testsupport::levenshtein_oracle(a, b));
    }
}

TEST_CASE("near-duplicate rule has inclusive bounds") {
    SUBCASE("boundary pair: ratio exactly 0.6, distance exactly 9") {
        // 12 matched chars of 40 total -> ratio 0.6; lengths 21 vs 19
        // with 9 edits.
        const std::string seed = "aaaaaaaaaaaa" + std::string("bbbbbbbbb");   // 12 a + 9 b
        const std::string cand = "aaaaaaaaaaaa" + std::string("ccccccc");     // 12 a + 7 c
        const auto v = simtext::is_near_duplicate(cand, seed);
        CHECK(v.ratio == doctest::Approx(0.6).epsilon(1e-15));
        CHECK(v.distance == 9);
        CHECK(v.duplicate);
    }
    SUBCASE("high ratio but distance over the cap is kept") {
        const std::string seed(40, 'a');
        const std::string cand = std::string(40, 'a') + std::string(10, 'b');
        const auto v = simtext::is_near_duplicate(cand, seed);
        CHECK(v.ratio > 0.8);
        CHECK(v.distance == 10);
        CHECK_FALSE(v.duplicate);
    }
    SUBCASE("identical strings are duplicates") {
        const auto v = simtext::is_near_duplicate("same text", "same text");
        CHECK(v.ratio == 1.0);
        CHECK(v.distance == 0);
        CHECK(v.duplicate);
    }
}

TEST_CASE("find_nearest picks the best seed, ties to the lowest index") {
    const std::vector<std::string> seeds = {"aaaa", "abcd"};
    const auto [index, ratio] = simtext::find_nearest(seeds, "abcf");
    CHECK(index == 1);
    CHECK(ratio == doctest::Approx(0.75).epsilon(1e-15));

    const std::vector<std::string> one = {"x"};
    const auto [i2, r2] = simtext::find_nearest(one, "x");
    CHECK(i2 == 0);
    CHECK(r2 == 1.0);

    const std::vector<std::string> twins = {"abc", "abc"};
    CHECK(simtext::find_nearest(twins, "abc").first == 0);

    CHECK_THROWS_AS(simtext::find_nearest({}, "x"), ArgumentError);
}

TEST_CASE("decoder never throws on arbitrary bytes") {
    Rng rng(123);
    for (int i = 0; i < 2000; ++i) {
        std::string bytes;
        const std::size_t len = rng.below(64);
        for (std::size_t k = 0; k < len; ++k) {
            bytes.push_back(static_cast<char>(rng.below(256)));
        }
        CHECK_NOTHROW(simtext::gestalt_ratio(bytes, bytes));
        CHECK(simtext::levenshtein(bytes, bytes) == 0);
    }
}

TEST_SUITE_END();
