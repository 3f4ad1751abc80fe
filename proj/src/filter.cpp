#include "forge/filter.hpp"

#include "forge/errors.hpp"
#include "forge/extract.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace forge::filter {

namespace {

double pct_1dp(std::size_t count, std::size_t total) {
    if (total == 0) return 0.0;
    return std::round(1000.0 * static_cast<double>(count) / static_cast<double>(total)) / 10.0;
}

std::string pad_right(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

std::string pad_left(const std::string& s, std::size_t width) {
    if (s.size() >= width) return s;
    return std::string(width - s.size(), ' ') + s;
}

std::string format_pct(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", value);
    return buf;
}

}  // namespace

std::vector<corpus::InstructionRecord> judge_dataset(
    std::span<const corpus::InstructionRecord> records, llm::Client& client,
    const llm::GenerationParams& params, bool paper_verbatim) {
    std::vector<corpus::InstructionRecord> judged(records.begin(), records.end());
    for (auto& record : judged) {
        const auto bundle = prompts::judge_prompts(record.scheme, record, paper_verbatim);
        try {
            const std::string completion = client.generate(bundle, params);
            record.verdict = extract::parse_verdict(completion);
        } catch (const BackendError& e) {
            corpus::JudgeVerdict verdict;
            verdict.status = corpus::VerdictStatus::undecided;
            verdict.reason = std::string("backend error: ") + e.what();
            record.verdict = verdict;
        }
    }
    return judged;
}

FilterStats summarize(std::span<const corpus::InstructionRecord> records) {
    FilterStats stats;
    stats.total = records.size();
    for (const auto& record : records) {
        if (!record.verdict) {
            ++stats.undecided;
            continue;
        }
        switch (record.verdict->status) {
            case corpus::VerdictStatus::accept: ++stats.accepted; break;
            case corpus::VerdictStatus::reject: ++stats.rejected; break;
            case corpus::VerdictStatus::undecided: ++stats.undecided; break;
        }
    }
    stats.pct_accepted = pct_1dp(stats.accepted, stats.total);
    stats.pct_undecided = pct_1dp(stats.undecided, stats.total);
    return stats;
}

Partition partition(std::span<const corpus::InstructionRecord> records) {
    Partition parts;
    for (const auto& record : records) {
        if (!record.verdict) {
            throw ValidationError("record '" + record.id + "' has no verdict");
        }
        switch (record.verdict->status) {
            case corpus::VerdictStatus::accept: parts.accepted.push_back(record); break;
            case corpus::VerdictStatus::reject: parts.rejected.push_back(record); break;
            case corpus::VerdictStatus::undecided: parts.undecided.push_back(record); break;
        }
    }
    return parts;
}

std::vector<corpus::InstructionRecord> demote_low_ratings(
    std::span<const corpus::InstructionRecord> records, int min_rating) {
    std::vector<corpus::InstructionRecord> out(records.begin(), records.end());
    for (auto& record : out) {
        if (record.verdict && record.verdict->status == corpus::VerdictStatus::accept &&
            record.verdict->rating && *record.verdict->rating < min_rating) {
            record.verdict->status = corpus::VerdictStatus::reject;
        }
    }
    return out;
}

std::string render_stats_table(std::span<const std::pair<std::string, FilterStats>> rows) {
    constexpr std::size_t kNameWidth = 16;
    constexpr std::size_t kColWidth = 24;
    std::ostringstream out;
    out << pad_right("Dataset", kNameWidth) << pad_left("# of accepted examples", kColWidth)
        << pad_left("% of accepted examples", kColWidth)
        << pad_left("% of examples left undecided", kColWidth + 6) << '\n';
    for (const auto& [name, stats] : rows) {
        out << pad_right(name, kNameWidth) << pad_left(std::to_string(stats.accepted), kColWidth)
            << pad_left(format_pct(stats.pct_accepted), kColWidth)
            << pad_left(format_pct(stats.pct_undecided), kColWidth + 6) << '\n';
    }
    return out.str();
}

nlohmann::ordered_json stats_to_json(const FilterStats& stats) {
    nlohmann::ordered_json j;
    j["total"] = stats.total;
    j["accepted"] = stats.accepted;
    j["rejected"] = stats.rejected;
    j["undecided"] = stats.undecided;
    j["pct_accepted"] = stats.pct_accepted;
    j["pct_undecided"] = stats.pct_undecided;
    return j;
}

}  // namespace forge::filter
