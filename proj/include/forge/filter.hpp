#pragma once

#include "forge/corpus.hpp"
#include "forge/llm.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace forge::filter {

struct FilterStats {
    std::size_t total = 0;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t undecided = 0;
    double pct_accepted = 0.0;   // 100*accepted/total, rounded to 1 decimal
    double pct_undecided = 0.0;  // 100*undecided/total, rounded to 1 decimal
};

// Judges every record (judge prompts -> generate -> verdict parse) and
// returns the annotated records in input order. Backend failures never
// abort the batch: the failing record comes back undecided with the error
// noted as the reason.
std::vector<corpus::InstructionRecord> judge_dataset(
    std::span<const corpus::InstructionRecord> records, llm::Client& client,
    const llm::GenerationParams& params = llm::judge_defaults(), bool paper_verbatim = false);

// Records without a verdict count as undecided.
FilterStats summarize(std::span<const corpus::InstructionRecord> records);

struct Partition {
    std::vector<corpus::InstructionRecord> accepted;
    std::vector<corpus::InstructionRecord> rejected;
    std::vector<corpus::InstructionRecord> undecided;
};

// Disjoint cover of the input; throws ValidationError when a record has no
// verdict.
Partition partition(std::span<const corpus::InstructionRecord> records);

// Optional extension (off by default): demotes accepted records whose
// rating falls below min_rating to rejected.
std::vector<corpus::InstructionRecord> demote_low_ratings(
    std::span<const corpus::InstructionRecord> records, int min_rating);

// Text table: dataset, # accepted, % accepted, % undecided.
std::string render_stats_table(std::span<const std::pair<std::string, FilterStats>> rows);

nlohmann::ordered_json stats_to_json(const FilterStats& stats);

}  // namespace forge::filter
