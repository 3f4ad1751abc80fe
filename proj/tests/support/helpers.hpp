#pragma once

// Test-only helpers: reference oracles kept independent of the library code
// paths they check, golden-file loading, temp dirs.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace testsupport {

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::string golden(const std::string& name) {
    return read_file(std::filesystem::path(FORGE_GOLDEN_DIR) / name);
}

inline std::filesystem::path data_file(const std::string& name) {
    return std::filesystem::path(FORGE_TEST_DATA_DIR) / name;
}

struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("forge_test_" + tag + "_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

// Minimal UTF-8 decoder for oracle inputs (valid UTF-8 only; test corpora
// are valid by construction).
inline std::u32string oracle_decode(std::string_view text) {
    std::u32string out;
    std::size_t i = 0;
    while (i < text.size()) {
        const unsigned char c = static_cast<unsigned char>(text[i]);
        char32_t cp = 0;
        std::size_t len = 1;
        if (c < 0x80) {
            cp = c;
        } else if ((c & 0xe0) == 0xc0) {
            cp = c & 0x1f;
            len = 2;
        } else if ((c & 0xf0) == 0xe0) {
            cp = c & 0x0f;
            len = 3;
        } else {
            cp = c & 0x07;
            len = 4;
        }
        for (std::size_t k = 1; k < len; ++k) {
            cp = (cp << 6) | (static_cast<unsigned char>(text[i + k]) & 0x3f);
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

// Full-matrix edit-distance oracle.
inline std::size_t levenshtein_oracle(std::string_view a_text, std::string_view b_text) {
    const std::u32string a = oracle_decode(a_text);
    const std::u32string b = oracle_decode(b_text);
    std::vector<std::vector<std::size_t>> d(a.size() + 1,
                                            std::vector<std::size_t>(b.size() + 1, 0));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost});
        }
    }
    return d[a.size()][b.size()];
}

namespace detail {

struct Match {
    std::size_t i, j, size;
};

// Recursive port of the reference sequence matcher (junk disabled): longest
// block first (ties to the earliest start in a, then in b), then recurse on
// both sides.
inline Match ro_longest_match(const std::u32string& a, std::size_t alo, std::size_t ahi,
                              std::size_t blo, std::size_t bhi,
                              const std::map<char32_t, std::vector<std::size_t>>& b2j) {
    Match best{alo, blo, 0};
    std::map<std::size_t, std::size_t> j2len;
    for (std::size_t i = alo; i < ahi; ++i) {
        std::map<std::size_t, std::size_t> newj2len;
        const auto it = b2j.find(a[i]);
        if (it != b2j.end()) {
            for (std::size_t j : it->second) {
                if (j < blo || j >= bhi) continue;
                std::size_t k = 1;
                if (j > blo) {
                    const auto prev = j2len.find(j - 1);
                    if (prev != j2len.end()) k = prev->second + 1;
                }
                newj2len[j] = k;
                if (k > best.size) {
                    best = {i - k + 1, j - k + 1, k};
                }
            }
        }
        j2len = std::move(newj2len);
    }
    return best;
}

inline std::size_t ro_matches(const std::u32string& a, std::size_t alo, std::size_t ahi,
                              std::size_t blo, std::size_t bhi,
                              const std::map<char32_t, std::vector<std::size_t>>& b2j) {
    const Match m = ro_longest_match(a, alo, ahi, blo, bhi, b2j);
    if (m.size == 0) return 0;
    return m.size + ro_matches(a, alo, m.i, blo, m.j, b2j) +
           ro_matches(a, m.i + m.size, ahi, m.j + m.size, bhi, b2j);
}

}  // namespace detail

// Ratio oracle matching the canonical-order contract of the implementation.
inline double gestalt_oracle(std::string_view a_text, std::string_view b_text) {
    std::u32string a = oracle_decode(a_text);
    std::u32string b = oracle_decode(b_text);
    if (a.empty() && b.empty()) return 1.0;
    if (b < a) std::swap(a, b);
    std::map<char32_t, std::vector<std::size_t>> b2j;
    for (std::size_t j = 0; j < b.size(); ++j) b2j[b[j]].push_back(j);
    const std::size_t m = detail::ro_matches(a, 0, a.size(), 0, b.size(), b2j);
    return 2.0 * static_cast<double>(m) / static_cast<double>(a.size() + b.size());
}

// Pearson chi-square statistic against uniform expected counts.
inline double chi_square_uniform(const std::vector<std::size_t>& observed, std::size_t draws) {
    const double expected = static_cast<double>(draws) / static_cast<double>(observed.size());
    double stat = 0.0;
    for (std::size_t count : observed) {
        const double diff = static_cast<double>(count) - expected;
        stat += diff * diff / expected;
    }
    return stat;
}

// Upper-tail critical values at alpha = 0.001.
inline double chi_square_critical(std::size_t df) {
    static const std::map<std::size_t, double> kCritical = {
        {1, 10.827566170662733}, {2, 13.815510557964274}, {3, 16.26623619623813},
        {4, 18.46682695290317},  {9, 27.877164871256568},
    };
    return kCritical.at(df);
}

}  // namespace testsupport
