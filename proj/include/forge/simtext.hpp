#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>

namespace forge::simtext {

inline constexpr double kDefaultRatioThreshold = 0.6;
inline constexpr std::size_t kDefaultDistanceThreshold = 9;

struct SimilarityVerdict {
    double ratio = 0.0;
    std::size_t distance = 0;
    bool duplicate = false;
};

// Decodes UTF-8 into Unicode scalar values. Never throws: each byte of an
// invalid sequence becomes a private code point above the Unicode range, so
// arbitrary bytes still compare deterministically.
std::u32string decode_utf8(std::string_view text);

// Ratcliff-Obershelp similarity, 2*M/(|a|+|b|) with M the total character
// count of recursively matched longest common substrings. Matches the
// classic sequence-matcher with junk heuristics disabled; the pair is
// ordered canonically before matching so the result is symmetric.
// Both inputs empty -> 1.0.
double gestalt_ratio(std::string_view a, std::string_view b);

// Minimal number of single-character insertions, deletions and
// substitutions, computed over Unicode scalar values.
std::size_t levenshtein(std::string_view a, std::string_view b);

// The near-duplicate rule: duplicate iff ratio >= ratio_threshold and
// distance <= distance_threshold (both bounds inclusive).
SimilarityVerdict is_near_duplicate(std::string_view candidate, std::string_view seed,
                                    double ratio_threshold = kDefaultRatioThreshold,
                                    std::size_t distance_threshold = kDefaultDistanceThreshold);

// Index and ratio of the seed most similar to the candidate. Ties go to the
// lowest index. Throws ArgumentError on an empty seed list.
std::pair<std::size_t, double> find_nearest(std::span<const std::string> seeds,
                                            std::string_view candidate);

}  // namespace forge::simtext
