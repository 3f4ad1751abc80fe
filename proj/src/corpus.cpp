#include "forge/corpus.hpp"

#include "forge/errors.hpp"
#include "forge/hash.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace forge::corpus {

namespace {

using nlohmann::ordered_json;

template <typename Enum, std::size_t N>
std::string_view enum_name(Enum v, const std::array<std::pair<Enum, std::string_view>, N>& table) {
    for (const auto& [value, name] : table) {
        if (value == v) return name;
    }
    throw ValidationError("unknown enum value");
}

template <typename Enum, std::size_t N>
Enum enum_value(std::string_view s, const std::array<std::pair<Enum, std::string_view>, N>& table,
                std::string_view field) {
    for (const auto& [value, name] : table) {
        if (name == s) return value;
    }
    throw ValidationError("field '" + std::string(field) + "' has unknown value '" +
                          std::string(s) + "'");
}

constexpr std::array<std::pair<Scheme, std::string_view>, 4> kSchemes{{
    {Scheme::lamini, "lamini"},
    {Scheme::evol, "evol"},
    {Scheme::orca, "orca"},
    {Scheme::seed, "seed"},
}};

constexpr std::array<std::pair<Category, std::string_view>, 7> kCategories{{
    {Category::creative_writing, "creative_writing"},
    {Category::closed_qa, "closed_qa"},
    {Category::open_qa, "open_qa"},
    {Category::summarization, "summarization"},
    {Category::information_extraction, "information_extraction"},
    {Category::classification, "classification"},
    {Category::brainstorming, "brainstorming"},
}};

constexpr std::array<std::pair<Submixture, std::string_view>, 4> kSubmixtures{{
    {Submixture::flan2021, "flan2021"},
    {Submixture::t0, "t0"},
    {Submixture::niv2, "niv2"},
    {Submixture::cot, "cot"},
}};

constexpr std::array<std::pair<EvolStrategy, std::string_view>, 2> kStrategies{{
    {EvolStrategy::in_depth, "in_depth"},
    {EvolStrategy::in_breadth, "in_breadth"},
}};

constexpr std::array<std::pair<EvolOperation, std::string_view>, 4> kOperations{{
    {EvolOperation::add_constraints, "add_constraints"},
    {EvolOperation::deepening, "deepening"},
    {EvolOperation::concretizing, "concretizing"},
    {EvolOperation::increase_reasoning, "increase_reasoning"},
}};

constexpr std::array<std::pair<VerdictStatus, std::string_view>, 3> kStatuses{{
    {VerdictStatus::accept, "accept"},
    {VerdictStatus::reject, "reject"},
    {VerdictStatus::undecided, "undecided"},
}};

const std::set<std::string, std::less<>> kRecordKeys = {
    "id",       "scheme",   "category", "submixture", "system_message_id",
    "instruction", "context", "expected", "response",  "lineage",  "verdict"};
const std::set<std::string, std::less<>> kLineageKeys = {"parent_id", "epoch", "strategy",
                                                         "operation"};
const std::set<std::string, std::less<>> kVerdictKeys = {"status", "rating", "reason"};

std::string require_string(const ordered_json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) {
        throw ValidationError(std::string("field '") + key + "' is required");
    }
    if (!it->is_string()) {
        throw ValidationError(std::string("field '") + key + "' must be a string");
    }
    return it->get<std::string>();
}

std::optional<std::string> optional_string(const ordered_json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) return std::nullopt;
    if (!it->is_string()) {
        throw ValidationError(std::string("field '") + key + "' must be a string");
    }
    return it->get<std::string>();
}

void reject_unknown_keys(const ordered_json& j, const std::set<std::string, std::less<>>& known,
                         std::string_view where) {
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) {
            throw ValidationError("unknown field '" + key + "' in " + std::string(where));
        }
    }
}

}  // namespace

std::string_view to_string(Scheme v) { return enum_name(v, kSchemes); }
std::string_view to_string(Category v) { return enum_name(v, kCategories); }
std::string_view to_string(Submixture v) { return enum_name(v, kSubmixtures); }
std::string_view to_string(EvolStrategy v) { return enum_name(v, kStrategies); }
std::string_view to_string(EvolOperation v) { return enum_name(v, kOperations); }
std::string_view to_string(VerdictStatus v) { return enum_name(v, kStatuses); }

Scheme scheme_from_string(std::string_view s) { return enum_value(s, kSchemes, "scheme"); }
Category category_from_string(std::string_view s) { return enum_value(s, kCategories, "category"); }
Submixture submixture_from_string(std::string_view s) {
    return enum_value(s, kSubmixtures, "submixture");
}
EvolStrategy strategy_from_string(std::string_view s) {
    return enum_value(s, kStrategies, "strategy");
}
EvolOperation operation_from_string(std::string_view s) {
    return enum_value(s, kOperations, "operation");
}
VerdictStatus status_from_string(std::string_view s) { return enum_value(s, kStatuses, "status"); }

void validate(const InstructionRecord& record) {
    if (record.id.empty()) {
        throw ValidationError("field 'id' must be non-empty");
    }
    if (record.scheme == Scheme::orca) {
        if (!record.submixture) {
            throw ValidationError("field 'submixture' is required for scheme orca");
        }
        if (!record.system_message_id) {
            throw ValidationError("field 'system_message_id' is required for scheme orca");
        }
    } else {
        if (record.submixture) {
            throw ValidationError("field 'submixture' is only allowed for scheme orca");
        }
        if (record.system_message_id) {
            throw ValidationError("field 'system_message_id' is only allowed for scheme orca");
        }
    }
    if (record.system_message_id &&
        (*record.system_message_id < 1 || *record.system_message_id > 16)) {
        throw ValidationError("field 'system_message_id' must be in [1,16]");
    }
    if (record.lineage) {
        const auto& lineage = *record.lineage;
        if (lineage.parent_id.empty()) {
            throw ValidationError("field 'lineage.parent_id' must be non-empty");
        }
        if (lineage.epoch < 1 || lineage.epoch > 2) {
            throw ValidationError("field 'lineage.epoch' must be 1 or 2");
        }
        const bool has_op = lineage.operation.has_value();
        if ((lineage.strategy == EvolStrategy::in_depth) != has_op) {
            throw ValidationError(
                "field 'lineage.operation' must be present exactly when strategy is in_depth");
        }
    }
    if (record.verdict) {
        const auto& verdict = *record.verdict;
        if (verdict.rating && (*verdict.rating < 1 || *verdict.rating > 7)) {
            throw ValidationError("field 'verdict.rating' must be in [1,7]");
        }
        if (verdict.status == VerdictStatus::undecided && verdict.rating) {
            throw ValidationError("field 'verdict.rating' must be absent for undecided status");
        }
    }
}

nlohmann::ordered_json record_to_json(const InstructionRecord& record) {
    ordered_json j;
    j["id"] = record.id;
    j["scheme"] = to_string(record.scheme);
    if (record.category) j["category"] = to_string(*record.category);
    if (record.submixture) j["submixture"] = to_string(*record.submixture);
    if (record.system_message_id) j["system_message_id"] = *record.system_message_id;
    j["instruction"] = record.instruction;
    if (record.context) j["context"] = *record.context;
    if (record.expected) j["expected"] = *record.expected;
    if (record.response) j["response"] = *record.response;
    if (record.lineage) {
        ordered_json lj;
        lj["parent_id"] = record.lineage->parent_id;
        lj["epoch"] = record.lineage->epoch;
        lj["strategy"] = to_string(record.lineage->strategy);
        if (record.lineage->operation) lj["operation"] = to_string(*record.lineage->operation);
        j["lineage"] = std::move(lj);
    }
    if (record.verdict) {
        ordered_json vj;
        vj["status"] = to_string(record.verdict->status);
        if (record.verdict->rating) vj["rating"] = *record.verdict->rating;
        if (record.verdict->reason) vj["reason"] = *record.verdict->reason;
        j["verdict"] = std::move(vj);
    }
    return j;
}

InstructionRecord record_from_json(const nlohmann::ordered_json& j) {
    if (!j.is_object()) {
        throw ValidationError("record must be an object");
    }
    reject_unknown_keys(j, kRecordKeys, "record");
    InstructionRecord record;
    record.id = require_string(j, "id");
    record.scheme = scheme_from_string(require_string(j, "scheme"));
    if (auto s = optional_string(j, "category")) record.category = category_from_string(*s);
    if (auto s = optional_string(j, "submixture")) record.submixture = submixture_from_string(*s);
    if (auto it = j.find("system_message_id"); it != j.end()) {
        if (!it->is_number_integer()) {
            throw ValidationError("field 'system_message_id' must be an integer");
        }
        record.system_message_id = it->get<int>();
    }
    record.instruction = require_string(j, "instruction");
    record.context = optional_string(j, "context");
    record.expected = optional_string(j, "expected");
    record.response = optional_string(j, "response");
    if (auto it = j.find("lineage"); it != j.end()) {
        if (!it->is_object()) throw ValidationError("field 'lineage' must be an object");
        reject_unknown_keys(*it, kLineageKeys, "lineage");
        EvolLineage lineage;
        lineage.parent_id = require_string(*it, "parent_id");
        auto epoch_it = it->find("epoch");
        if (epoch_it == it->end() || !epoch_it->is_number_integer()) {
            throw ValidationError("field 'lineage.epoch' must be an integer");
        }
        lineage.epoch = epoch_it->get<int>();
        lineage.strategy = strategy_from_string(require_string(*it, "strategy"));
        if (auto s = optional_string(*it, "operation")) {
            lineage.operation = operation_from_string(*s);
        }
        record.lineage = std::move(lineage);
    }
    if (auto it = j.find("verdict"); it != j.end()) {
        if (!it->is_object()) throw ValidationError("field 'verdict' must be an object");
        reject_unknown_keys(*it, kVerdictKeys, "verdict");
        JudgeVerdict verdict;
        verdict.status = status_from_string(require_string(*it, "status"));
        if (auto rating_it = it->find("rating"); rating_it != it->end()) {
            if (!rating_it->is_number_integer()) {
                throw ValidationError("field 'verdict.rating' must be an integer");
            }
            verdict.rating = rating_it->get<int>();
        }
        verdict.reason = optional_string(*it, "reason");
        record.verdict = std::move(verdict);
    }
    validate(record);
    return record;
}

InstructionRecord parse_record(std::string_view line) {
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed record: ") + e.what(), e.byte);
    }
    return record_from_json(j);
}

std::string serialize_record(const InstructionRecord& record) {
    validate(record);
    return record_to_json(record).dump();
}

std::string make_record_id(Scheme scheme, std::string_view instruction,
                           const std::optional<std::string>& context) {
    // Length-prefixed framing keeps (instruction, context) splits unambiguous.
    std::string payload;
    const auto append = [&payload](std::string_view part) {
        payload += std::to_string(part.size());
        payload += ':';
        payload += part;
    };
    append(to_string(scheme));
    append(instruction);
    payload += context ? '1' : '0';
    if (context) append(*context);
    return sha256_hex(payload).substr(0, 16);
}

DatasetStats dataset_stats(std::span<const InstructionRecord> records) {
    DatasetStats stats;
    stats.total = records.size();
    for (const auto& record : records) {
        stats.per_category[record.category ? std::string(to_string(*record.category)) : "none"]++;
        stats.per_submixture[record.submixture ? std::string(to_string(*record.submixture))
                                               : "none"]++;
        if (record.lineage) {
            stats.per_strategy[std::string(to_string(record.lineage->strategy))]++;
            stats.per_operation[record.lineage->operation
                                    ? std::string(to_string(*record.lineage->operation))
                                    : "none"]++;
        } else {
            stats.per_strategy["none"]++;
            stats.per_operation["none"]++;
        }
    }
    return stats;
}

nlohmann::ordered_json stats_to_json(const DatasetStats& stats) {
    ordered_json j;
    j["total"] = stats.total;
    j["per_category"] = stats.per_category;
    j["per_strategy"] = stats.per_strategy;
    j["per_operation"] = stats.per_operation;
    j["per_submixture"] = stats.per_submixture;
    return j;
}

std::vector<InstructionRecord> load_dataset(const std::filesystem::path& path,
                                            std::optional<FileHeader>* header) {
    std::ifstream in(path);
    if (!in) {
        throw ArgumentError("cannot open dataset file: " + path.string());
    }
    if (header) *header = std::nullopt;
    std::vector<InstructionRecord> records;
    std::set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1) {
            ordered_json j = ordered_json::parse(line, nullptr, false);
            if (j.is_object() && j.contains("header")) {
                if (header) {
                    FileHeader h;
                    const auto& hj = j["header"];
                    h.seed = hj.value("seed", 0ull);
                    h.rng_algorithm = hj.value("rng_algorithm", "");
                    h.tool = hj.value("tool", "");
                    *header = h;
                }
                continue;
            }
        }
        InstructionRecord record;
        try {
            record = parse_record(line);
        } catch (const Error& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (!seen_ids.insert(record.id).second) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": duplicate record id '" + record.id + "'");
        }
        records.push_back(std::move(record));
    }
    return records;
}

void write_dataset(const std::filesystem::path& path, std::span<const InstructionRecord> records,
                   const std::optional<FileHeader>& header) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ArgumentError("cannot open output file: " + path.string());
    }
    if (header) {
        ordered_json hj;
        hj["header"] = {{"seed", header->seed},
                        {"rng_algorithm", header->rng_algorithm},
                        {"tool", header->tool}};
        out << hj.dump() << '\n';
    }
    std::set<std::string> seen_ids;
    for (const auto& record : records) {
        if (!seen_ids.insert(record.id).second) {
            throw ValidationError("duplicate record id '" + record.id + "' in output dataset");
        }
        out << serialize_record(record) << '\n';
    }
}

}  // namespace forge::corpus
