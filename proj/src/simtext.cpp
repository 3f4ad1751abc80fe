#include "forge/simtext.hpp"

#include "forge/errors.hpp"

#include <algorithm>
#include <array>
#include <unordered_map>
#include <vector>

namespace forge::simtext {

namespace {

// Code point used for byte b of an invalid UTF-8 sequence. Outside the
// Unicode range, so it can never collide with decoded text.
constexpr char32_t invalid_byte(unsigned char b) {
    return static_cast<char32_t>(0x110000u + b);
}

struct Block {
    std::size_t a_start;
    std::size_t b_start;
    std::size_t size;
};

// Longest matching block between a[alo,ahi) and b[blo,bhi); ties resolved to
// the block starting earliest in a, then earliest in b. This is the
// sequence-matcher scan: j2len[j] holds the length of the match ending at
// (i, j), carried forward one row at a time.
Block longest_match(const std::u32string& a, std::size_t alo, std::size_t ahi, std::size_t blo,
                    std::size_t bhi,
                    const std::unordered_map<char32_t, std::vector<std::size_t>>& b2j,
                    std::vector<std::size_t>& j2len, std::vector<std::size_t>& newj2len) {
    Block best{alo, blo, 0};
    std::fill(j2len.begin(), j2len.end(), 0);
    for (std::size_t i = alo; i < ahi; ++i) {
        std::fill(newj2len.begin(), newj2len.end(), 0);
        auto it = b2j.find(a[i]);
        if (it != b2j.end()) {
            for (std::size_t j : it->second) {
                if (j < blo) continue;
                if (j >= bhi) break;
                const std::size_t k = (j > blo ? j2len[j - 1] : 0) + 1;
                newj2len[j] = k;
                if (k > best.size) {
                    best = {i - k + 1, j - k + 1, k};
                }
            }
        }
        std::swap(j2len, newj2len);
    }
    return best;
}

// Total matched characters of the recursive longest-common-substring
// decomposition.
std::size_t total_matches(const std::u32string& a, const std::u32string& b) {
    std::unordered_map<char32_t, std::vector<std::size_t>> b2j;
    for (std::size_t j = 0; j < b.size(); ++j) {
        b2j[b[j]].push_back(j);
    }
    std::vector<std::size_t> j2len(b.size()), newj2len(b.size());

    std::size_t matched = 0;
    std::vector<std::array<std::size_t, 4>> queue;
    queue.push_back({0, a.size(), 0, b.size()});
    while (!queue.empty()) {
        auto [alo, ahi, blo, bhi] = queue.back();
        queue.pop_back();
        const Block m = longest_match(a, alo, ahi, blo, bhi, b2j, j2len, newj2len);
        if (m.size == 0) continue;
        matched += m.size;
        if (alo < m.a_start && blo < m.b_start) {
            queue.push_back({alo, m.a_start, blo, m.b_start});
        }
        if (m.a_start + m.size < ahi && m.b_start + m.size < bhi) {
            queue.push_back({m.a_start + m.size, ahi, m.b_start + m.size, bhi});
        }
    }
    return matched;
}

}  // namespace

std::u32string decode_utf8(std::string_view text) {
    std::u32string out;
    out.reserve(text.size());
    std::size_t i = 0;
    const auto n = text.size();
    while (i < n) {
        const unsigned char c0 = static_cast<unsigned char>(text[i]);
        if (c0 < 0x80) {
            out.push_back(c0);
            ++i;
            continue;
        }
        std::size_t len = 0;
        char32_t cp = 0;
        char32_t min_cp = 0;
        if ((c0 & 0xe0) == 0xc0) {
            len = 2; cp = c0 & 0x1f; min_cp = 0x80;
        } else if ((c0 & 0xf0) == 0xe0) {
            len = 3; cp = c0 & 0x0f; min_cp = 0x800;
        } else if ((c0 & 0xf8) == 0xf0) {
            len = 4; cp = c0 & 0x07; min_cp = 0x10000;
        } else {
            out.push_back(invalid_byte(c0));
            ++i;
            continue;
        }
        if (i + len > n) {
            out.push_back(invalid_byte(c0));
            ++i;
            continue;
        }
        bool ok = true;
        for (std::size_t k = 1; k < len; ++k) {
            const unsigned char ck = static_cast<unsigned char>(text[i + k]);
            if ((ck & 0xc0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (ck & 0x3f);
        }
        if (!ok || cp < min_cp || cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff)) {
            out.push_back(invalid_byte(c0));
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

double gestalt_ratio(std::string_view a_text, std::string_view b_text) {
    std::u32string a = decode_utf8(a_text);
    std::u32string b = decode_utf8(b_text);
    const std::size_t length = a.size() + b.size();
    if (length == 0) {
        return 1.0;
    }
    // Canonical order: the matcher's tie-breaking is order-sensitive, so a
    // fixed orientation keeps the ratio symmetric.
    if (b < a) {
        std::swap(a, b);
    }
    return 2.0 * static_cast<double>(total_matches(a, b)) / static_cast<double>(length);
}

std::size_t levenshtein(std::string_view a_text, std::string_view b_text) {
    const std::u32string a = decode_utf8(a_text);
    const std::u32string b = decode_utf8(b_text);
    if (a.empty()) return b.size();
    if (b.empty()) return a.size();

    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

SimilarityVerdict is_near_duplicate(std::string_view candidate, std::string_view seed,
                                    double ratio_threshold, std::size_t distance_threshold) {
    SimilarityVerdict v;
    v.ratio = gestalt_ratio(candidate, seed);
    v.distance = levenshtein(candidate, seed);
    v.duplicate = v.ratio >= ratio_threshold && v.distance <= distance_threshold;
    return v;
}

std::pair<std::size_t, double> find_nearest(std::span<const std::string> seeds,
                                            std::string_view candidate) {
    if (seeds.empty()) {
        throw ArgumentError("find_nearest requires at least one seed");
    }
    std::size_t best_index = 0;
    double best_ratio = gestalt_ratio(seeds[0], candidate);
    for (std::size_t i = 1; i < seeds.size(); ++i) {
        const double r = gestalt_ratio(seeds[i], candidate);
        if (r > best_ratio) {
            best_ratio = r;
            best_index = i;
        }
    }
    return {best_index, best_ratio};
}

}  // namespace forge::simtext
