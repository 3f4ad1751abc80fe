#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace forge::corpus {

enum class Scheme { lamini, evol, orca, seed };

// The seven instruction categories of the Dolly seed dataset.
enum class Category {
    creative_writing,
    closed_qa,
    open_qa,
    summarization,
    information_extraction,
    classification,
    brainstorming,
};

// FLAN-v2 sub-collections (the Dialog submixture is not used).
enum class Submixture { flan2021, t0, niv2, cot };

enum class EvolStrategy { in_depth, in_breadth };
enum class EvolOperation { add_constraints, deepening, concretizing, increase_reasoning };
enum class VerdictStatus { accept, reject, undecided };

struct JudgeVerdict {
    VerdictStatus status = VerdictStatus::undecided;
    std::optional<int> rating;        // 1..7 when present
    std::optional<std::string> reason;
};

struct EvolLineage {
    std::string parent_id;
    int epoch = 1;                    // 1 or 2
    EvolStrategy strategy = EvolStrategy::in_depth;
    std::optional<EvolOperation> operation;  // present iff strategy == in_depth
};

struct InstructionRecord {
    std::string id;
    Scheme scheme = Scheme::seed;
    std::optional<Category> category;
    std::optional<Submixture> submixture;        // orca only
    std::optional<int> system_message_id;        // orca only, 1..16
    std::string instruction;
    std::optional<std::string> context;
    std::optional<std::string> expected;         // orca target
    std::optional<std::string> response;
    std::optional<EvolLineage> lineage;
    std::optional<JudgeVerdict> verdict;
};

// enum <-> string names as they appear on the wire
std::string_view to_string(Scheme v);
std::string_view to_string(Category v);
std::string_view to_string(Submixture v);
std::string_view to_string(EvolStrategy v);
std::string_view to_string(EvolOperation v);
std::string_view to_string(VerdictStatus v);
Scheme scheme_from_string(std::string_view s);
Category category_from_string(std::string_view s);
Submixture submixture_from_string(std::string_view s);
EvolStrategy strategy_from_string(std::string_view s);
EvolOperation operation_from_string(std::string_view s);
VerdictStatus status_from_string(std::string_view s);

constexpr std::array<Category, 7> kAllCategories = {
    Category::creative_writing,   Category::closed_qa,      Category::open_qa,
    Category::summarization,      Category::information_extraction,
    Category::classification,     Category::brainstorming,
};
constexpr std::array<Submixture, 4> kAllSubmixtures = {
    Submixture::flan2021, Submixture::t0, Submixture::niv2, Submixture::cot,
};

// Throws ValidationError naming the offending field.
void validate(const InstructionRecord& record);

// One record per line. parse_record throws ParseError (with byte offset) on
// malformed syntax and ValidationError on invariant violations;
// serialize(parse(line)) == line for lines produced by serialize_record.
InstructionRecord parse_record(std::string_view line);
std::string serialize_record(const InstructionRecord& record);
nlohmann::ordered_json record_to_json(const InstructionRecord& record);
InstructionRecord record_from_json(const nlohmann::ordered_json& j);

// Deterministic content identity: sha256 of (scheme, instruction, context),
// truncated to 16 hex chars.
std::string make_record_id(Scheme scheme, std::string_view instruction,
                           const std::optional<std::string>& context = std::nullopt);

struct DatasetStats {
    std::map<std::string, std::size_t> per_category;
    std::map<std::string, std::size_t> per_strategy;
    std::map<std::string, std::size_t> per_operation;
    std::map<std::string, std::size_t> per_submixture;
    std::size_t total = 0;
};

// Records missing a dimension are counted under the "none" bucket, so every
// partition sums to total.
DatasetStats dataset_stats(std::span<const InstructionRecord> records);
nlohmann::ordered_json stats_to_json(const DatasetStats& stats);

// Optional first line of a dataset file; records the seed that produced it.
struct FileHeader {
    std::uint64_t seed = 0;
    std::string rng_algorithm;
    std::string tool;
};

std::vector<InstructionRecord> load_dataset(const std::filesystem::path& path,
                                            std::optional<FileHeader>* header = nullptr);
void write_dataset(const std::filesystem::path& path,
                   std::span<const InstructionRecord> records,
                   const std::optional<FileHeader>& header = std::nullopt);

}  // namespace forge::corpus
