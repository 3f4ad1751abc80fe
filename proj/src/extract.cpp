#include "forge/extract.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

namespace forge::extract {

namespace {

constexpr std::string_view kOpenTag = "<example>";
constexpr std::string_view kCloseTag = "</example>";

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) ==
                      std::tolower(static_cast<unsigned char>(y));
           });
}

// Inner text of the first <tag>...</tag> pair at or after `from`.
std::optional<std::string_view> tag_content(std::string_view text, std::string_view tag,
                                            std::size_t from = 0) {
    const std::string open = "<" + std::string(tag) + ">";
    const std::string close = "</" + std::string(tag) + ">";
    const auto start = text.find(open, from);
    if (start == std::string_view::npos) return std::nullopt;
    const auto body = start + open.size();
    const auto end = text.find(close, body);
    if (end == std::string_view::npos) return std::nullopt;
    return text.substr(body, end - body);
}

std::optional<int> parse_rating_value(std::string_view raw) {
    const std::string_view s = trim(raw);
    if (s.empty()) return std::nullopt;
    std::size_t i = 0;
    bool negative = false;
    if (s[0] == '-') {
        negative = true;
        i = 1;
        if (s.size() == 1) return std::nullopt;
    }
    long value = 0;
    for (; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
        value = value * 10 + (s[i] - '0');
        if (value > 1000000) return std::nullopt;
    }
    return static_cast<int>(negative ? -value : value);
}

}  // namespace

ExtractionResult extract_examples(std::string_view completion) {
    ExtractionResult result;
    std::size_t pos = 0;
    while (true) {
        const auto open = completion.find(kOpenTag, pos);
        if (open == std::string_view::npos) break;
        const auto body = open + kOpenTag.size();
        const auto close = completion.find(kCloseTag, body);
        if (close == std::string_view::npos) break;
        result.examples.emplace_back(completion.substr(body, close - body));
        pos = close + kCloseTag.size();
    }

    if (result.examples.empty()) {
        result.anomaly = Anomaly::no_tags;
        return result;
    }
    const std::string_view lead = trim(completion);
    if (lead.substr(0, 19) == "Here are 5 examples" ||
        lead.substr(0, 22) == "Here are five examples") {
        result.anomaly = Anomaly::bulk_preamble;
    }
    return result;
}

Equality parse_equality(std::string_view completion) {
    const std::string lowered = to_lower(completion);
    if (lowered.find("not equal") != std::string::npos) return Equality::not_equal;
    if (lowered.find("equal") != std::string::npos) return Equality::equal;
    return Equality::undecided;
}

corpus::JudgeVerdict parse_verdict(std::string_view completion) {
    corpus::JudgeVerdict verdict;
    verdict.status = corpus::VerdictStatus::undecided;

    if (auto reason = tag_content(completion, "reason")) {
        const auto trimmed = trim(*reason);
        if (!trimmed.empty()) verdict.reason = std::string(trimmed);
    }

    const auto status_raw = tag_content(completion, "status");
    if (!status_raw) {
        return verdict;
    }
    const std::string_view status = trim(*status_raw);
    if (iequals(status, "accept")) {
        verdict.status = corpus::VerdictStatus::accept;
    } else if (iequals(status, "reject")) {
        verdict.status = corpus::VerdictStatus::reject;
    } else {
        return verdict;
    }

    if (auto rating_raw = tag_content(completion, "rating")) {
        const auto rating = parse_rating_value(*rating_raw);
        if (!rating || *rating < 1 || *rating > 7) {
            // Out-of-range or malformed rating: don't guess, leave the
            // record undecided with the reason kept for inspection.
            verdict.status = corpus::VerdictStatus::undecided;
            verdict.rating.reset();
            return verdict;
        }
        verdict.rating = rating;
    }
    return verdict;
}

std::string_view to_string(Anomaly a) {
    switch (a) {
        case Anomaly::none: return "none";
        case Anomaly::bulk_preamble: return "bulk_preamble";
        case Anomaly::no_tags: return "no_tags";
    }
    return "none";
}

std::string_view to_string(Equality e) {
    switch (e) {
        case Equality::equal: return "equal";
        case Equality::not_equal: return "not_equal";
        case Equality::undecided: return "undecided";
    }
    return "undecided";
}

}  // namespace forge::extract
