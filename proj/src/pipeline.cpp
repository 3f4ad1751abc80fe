#include "forge/pipeline.hpp"

#include "forge/errors.hpp"
#include "forge/extract.hpp"
#include "forge/prompts.hpp"
#include "forge/rng.hpp"
#include "forge/simtext.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

namespace forge::pipeline {

namespace {

using nlohmann::ordered_json;

std::string trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

std::map<corpus::Submixture, OrcaSubmixPlan> default_orca_plan() {
    std::map<corpus::Submixture, OrcaSubmixPlan> plan;
    plan[corpus::Submixture::flan2021] = {false, true, std::nullopt};
    plan[corpus::Submixture::t0] = {true, true, std::nullopt};
    plan[corpus::Submixture::niv2] = {true, false, std::nullopt};
    plan[corpus::Submixture::cot] = {false, false, std::nullopt};
    return plan;
}

std::vector<std::string> seed_instructions(std::span<const corpus::InstructionRecord> seeds) {
    std::vector<std::string> out;
    out.reserve(seeds.size());
    for (const auto& seed : seeds) {
        out.push_back(seed.instruction);
    }
    return out;
}

}  // namespace

PipelineConfig::PipelineConfig() : orca_plan(default_orca_plan()) {}

void PipelineConfig::validate() const {
    if (seeds_per_prompt != prompts::kSeedsPerPrompt) {
        throw ArgumentError("seeds_per_prompt is fixed at 3 by the generation template");
    }
    if (examples_per_iter != prompts::kExamplesPerRequest) {
        throw ArgumentError("examples_per_iter is fixed at 5 by the generation template");
    }
    if (lamini_iterations < 0) {
        throw ArgumentError("lamini_iterations must be >= 0");
    }
    if (topic_guided_probability < 0.0 || topic_guided_probability > 1.0) {
        throw ArgumentError("topic_guided_probability must be in [0,1]");
    }
    if (evol_subset_size < 1) {
        throw ArgumentError("evol_subset_size must be >= 1");
    }
    if (evol_max_epochs < 1 || evol_max_epochs > 2) {
        throw ArgumentError("evol_max_epochs must be 1 or 2");
    }
    if (orca_subtask_cap < 1) {
        throw ArgumentError("orca_subtask_cap must be >= 1");
    }
    if (dedup_ratio_threshold < 0.0 || dedup_ratio_threshold > 1.0) {
        throw ArgumentError("dedup ratio threshold must be in [0,1]");
    }
    generation_params.validate();
    judging_params.validate();
}

PipelineConfig PipelineConfig::from_json(const ordered_json& j) {
    PipelineConfig config;
    config.master_seed = j.value("master_seed", config.master_seed);
    if (auto it = j.find("backend"); it != j.end()) {
        const auto& b = *it;
        config.backend.url = b.value("url", config.backend.url);
        config.backend.api_key = b.value("api_key", config.backend.api_key);
        config.backend.model = b.value("model", config.backend.model);
        config.backend.backend_id = b.value("backend_id", config.backend.backend_id);
        if (b.contains("mode")) {
            config.backend.mode = llm::mode_from_string(b["mode"].get<std::string>());
        }
        config.backend.cache_path = b.value("cache_path", config.backend.cache_path.string());
        config.backend.requests_per_second =
            b.value("requests_per_second", config.backend.requests_per_second);
        config.backend.max_in_flight = b.value("max_in_flight", config.backend.max_in_flight);
        config.backend.max_retries = b.value("max_retries", config.backend.max_retries);
        config.backend.retry_base_ms = b.value("retry_base_ms", config.backend.retry_base_ms);
        config.backend.timeout_sec = b.value("timeout_sec", config.backend.timeout_sec);
    }
    config.lamini_iterations = j.value("lamini_iterations", config.lamini_iterations);
    config.topic_guided_probability =
        j.value("topic_guided_probability", config.topic_guided_probability);
    if (auto it = j.find("topics"); it != j.end()) {
        config.topics = it->get<std::vector<std::string>>();
    }
    config.evol_subset_size = j.value("evol_subset_size", config.evol_subset_size);
    config.evol_max_epochs = j.value("evol_max_epochs", config.evol_max_epochs);
    config.orca_subtask_cap = j.value("orca_subtask_cap", config.orca_subtask_cap);
    if (auto it = j.find("orca_plan"); it != j.end()) {
        for (const auto& [name, pj] : it->items()) {
            OrcaSubmixPlan plan;
            plan.apply_cap = pj.value("apply_cap", false);
            plan.algorithm1 = pj.value("algorithm1", false);
            if (pj.contains("sample_n")) {
                plan.sample_n = pj["sample_n"].get<std::size_t>();
            }
            config.orca_plan[corpus::submixture_from_string(name)] = plan;
        }
    }
    config.dedup_ratio_threshold = j.value("dedup_ratio", config.dedup_ratio_threshold);
    config.dedup_distance_threshold = j.value("dedup_distance", config.dedup_distance_threshold);
    if (auto it = j.find("generation_params"); it != j.end()) {
        config.generation_params.temperature =
            it->value("temperature", config.generation_params.temperature);
        config.generation_params.max_new_tokens =
            it->value("max_new_tokens", config.generation_params.max_new_tokens);
    }
    if (auto it = j.find("judging_params"); it != j.end()) {
        config.judging_params.temperature =
            it->value("temperature", config.judging_params.temperature);
        config.judging_params.max_new_tokens =
            it->value("max_new_tokens", config.judging_params.max_new_tokens);
    }
    config.validate();
    return config;
}

PipelineConfig PipelineConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ArgumentError("cannot open config file: " + path.string());
    }
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("malformed config: " + std::string(e.what()), e.byte);
    }
    return from_json(j);
}

nlohmann::ordered_json PipelineConfig::to_json() const {
    ordered_json j;
    j["master_seed"] = master_seed;
    j["backend"] = {{"url", backend.url},
                    {"model", backend.model},
                    {"mode", std::string(llm::to_string(backend.mode))},
                    {"cache_path", backend.cache_path.string()},
                    {"requests_per_second", backend.requests_per_second},
                    {"max_in_flight", backend.max_in_flight}};
    j["lamini_iterations"] = lamini_iterations;
    j["topic_guided_probability"] = topic_guided_probability;
    j["topics"] = topics;
    j["evol_subset_size"] = evol_subset_size;
    j["evol_max_epochs"] = evol_max_epochs;
    j["orca_subtask_cap"] = orca_subtask_cap;
    ordered_json plans = ordered_json::object();
    for (const auto& [submix, plan] : orca_plan) {
        ordered_json pj;
        pj["apply_cap"] = plan.apply_cap;
        pj["algorithm1"] = plan.algorithm1;
        if (plan.sample_n) pj["sample_n"] = *plan.sample_n;
        plans[std::string(corpus::to_string(submix))] = std::move(pj);
    }
    j["orca_plan"] = std::move(plans);
    j["dedup_ratio"] = dedup_ratio_threshold;
    j["dedup_distance"] = dedup_distance_threshold;
    j["generation_params"] = {{"temperature", generation_params.temperature},
                              {"max_new_tokens", generation_params.max_new_tokens}};
    j["judging_params"] = {{"temperature", judging_params.temperature},
                           {"max_new_tokens", judging_params.max_new_tokens}};
    return j;
}

LaminiResult run_lamini(const PipelineConfig& config,
                        std::span<const corpus::InstructionRecord> seed_dataset,
                        llm::Client& client) {
    config.validate();
    Rng rng = Rng(config.master_seed).derive("lamini");
    const std::vector<std::string> seeds = seed_instructions(seed_dataset);

    LaminiResult result;
    std::set<std::string> seen_ids;
    for (int iteration = 0; iteration < config.lamini_iterations; ++iteration) {
        const auto picked =
            sampler::sample_seed_examples(seed_dataset, std::nullopt,
                                          static_cast<std::size_t>(config.seeds_per_prompt), rng);
        const corpus::Category category = *picked.front().category;

        std::optional<std::vector<std::string>> topics;
        if (config.topics.size() >= 3 && rng.bernoulli(config.topic_guided_probability)) {
            std::vector<std::string> chosen;
            for (std::size_t index : rng.sample_indices(config.topics.size(), 3)) {
                chosen.push_back(config.topics[index]);
            }
            topics = std::move(chosen);
        }

        const std::string prompt = prompts::lamini_generation_prompt(picked, category, topics);
        const std::string completion =
            client.generate({std::nullopt, prompt}, config.generation_params);

        const auto extraction = extract::extract_examples(completion);
        if (extraction.anomaly != extract::Anomaly::none) {
            ordered_json row;
            row["iteration"] = iteration;
            row["kind"] = extract::to_string(extraction.anomaly);
            row["completion"] = completion;
            result.anomalies.push_back(std::move(row));
            continue;
        }

        for (const auto& raw : extraction.examples) {
            const std::string text = trim(raw);
            if (text.empty()) continue;

            const auto [nearest, ratio] = simtext::find_nearest(seeds, text);
            const auto verdict =
                simtext::is_near_duplicate(text, seeds[nearest], config.dedup_ratio_threshold,
                                           config.dedup_distance_threshold);
            if (verdict.duplicate) {
                ordered_json row;
                row["instruction"] = text;
                row["matched_seed_id"] = seed_dataset[nearest].id;
                row["ratio"] = verdict.ratio;
                row["distance"] = verdict.distance;
                result.dropped.push_back(std::move(row));
                continue;
            }

            corpus::InstructionRecord record;
            record.scheme = corpus::Scheme::lamini;
            record.category = category;
            record.instruction = text;
            record.id = corpus::make_record_id(record.scheme, record.instruction);
            if (!seen_ids.insert(record.id).second) continue;
            result.records.push_back(std::move(record));
        }
    }

    for (auto& record : result.records) {
        record.response =
            client.generate({std::nullopt, prompts::lamini_response_prompt(record.instruction,
                                                                           record.context)},
                            config.generation_params);
    }
    return result;
}

EvolResult run_evol(const PipelineConfig& config,
                    std::span<const corpus::InstructionRecord> seed_dataset,
                    llm::Client& client) {
    config.validate();
    Rng rng = Rng(config.master_seed).derive("evol");

    EvolResult result;
    std::set<std::string> seen_ids;

    struct WorkItem {
        std::string parent_id;
        std::string instruction;
    };

    for (const corpus::Category category : corpus::kAllCategories) {
        std::vector<std::size_t> indices;
        for (std::size_t i = 0; i < seed_dataset.size(); ++i) {
            if (seed_dataset[i].category && *seed_dataset[i].category == category) {
                indices.push_back(i);
            }
        }
        if (indices.empty()) continue;

        const std::size_t subset_size =
            std::min<std::size_t>(indices.size(), static_cast<std::size_t>(config.evol_subset_size));
        std::vector<WorkItem> current;
        for (std::size_t pick : rng.sample_indices(indices.size(), subset_size)) {
            const auto& seed = seed_dataset[indices[pick]];
            current.push_back({seed.id, seed.instruction});
        }

        const int epochs = 1 + static_cast<int>(rng.below(
                                   static_cast<std::uint64_t>(config.evol_max_epochs)));
        for (int epoch = 1; epoch <= epochs && !current.empty(); ++epoch) {
            const auto action = sampler::choose_evol_action(rng);
            std::vector<WorkItem> survivors;
            for (const auto& item : current) {
                const std::string evolved = trim(client.generate(
                    {std::nullopt,
                     prompts::evol_prompt(item.instruction, action.strategy, action.operation)},
                    config.generation_params));
                if (evolved.empty()) {
                    result.eliminated.push_back(
                        {{"parent_id", item.parent_id}, {"epoch", epoch}, {"reason", "empty"}});
                    continue;
                }

                const std::string equality_completion = client.generate(
                    {std::nullopt, prompts::equality_prompt(item.instruction, evolved)},
                    config.generation_params);
                const auto decision = extract::parse_equality(equality_completion);
                if (decision != extract::Equality::not_equal) {
                    ordered_json row;
                    row["parent_id"] = item.parent_id;
                    row["epoch"] = epoch;
                    row["candidate"] = evolved;
                    row["reason"] = extract::to_string(decision);
                    result.eliminated.push_back(std::move(row));
                    continue;
                }

                corpus::InstructionRecord record;
                record.scheme = corpus::Scheme::evol;
                record.category = category;
                record.instruction = evolved;
                record.id = corpus::make_record_id(record.scheme, record.instruction);
                corpus::EvolLineage lineage;
                lineage.parent_id = item.parent_id;
                lineage.epoch = epoch;
                lineage.strategy = action.strategy;
                lineage.operation = action.operation;
                record.lineage = std::move(lineage);
                if (!seen_ids.insert(record.id).second) continue;
                survivors.push_back({record.id, record.instruction});
                result.records.push_back(std::move(record));
            }
            current = std::move(survivors);
        }
    }

    for (auto& record : result.records) {
        record.response =
            client.generate({std::nullopt, prompts::evol_response_prompt(record.instruction)},
                            config.generation_params);
    }
    return result;
}

OrcaResult run_orca(const PipelineConfig& config,
                    const std::map<corpus::Submixture, sampler::TaskPool>& pools,
                    llm::Client& client) {
    config.validate();
    Rng rng = Rng(config.master_seed).derive("orca");

    OrcaResult result;
    std::set<std::string> seen_ids;
    for (const corpus::Submixture submixture : corpus::kAllSubmixtures) {
        const auto pool_it = pools.find(submixture);
        if (pool_it == pools.end()) continue;

        sampler::TaskPool pool = pool_it->second;
        OrcaSubmixPlan plan;
        if (const auto plan_it = config.orca_plan.find(submixture);
            plan_it != config.orca_plan.end()) {
            plan = plan_it->second;
        }
        if (plan.apply_cap) {
            pool = sampler::cap_per_subtask(pool, static_cast<std::size_t>(config.orca_subtask_cap),
                                            rng);
        }

        std::vector<sampler::Query> queries;
        if (plan.algorithm1) {
            const std::size_t n = std::min(plan.sample_n.value_or(pool.total()), pool.total());
            queries = sampler::sample_flan_queries(pool, n, rng);
        } else {
            for (const auto& [name, task_queries] : pool.tasks) {
                queries.insert(queries.end(), task_queries.begin(), task_queries.end());
            }
            if (plan.sample_n && *plan.sample_n < queries.size()) {
                std::vector<sampler::Query> picked;
                for (std::size_t index : rng.sample_indices(queries.size(), *plan.sample_n)) {
                    picked.push_back(queries[index]);
                }
                queries = std::move(picked);
            }
        }

        for (const auto& query : queries) {
            const int message_id = sampler::sample_system_message(submixture, rng);
            const std::string prompt = prompts::orca_prompt(
                prompts::orca_system_message(message_id), query.text, query.target);

            corpus::InstructionRecord record;
            record.scheme = corpus::Scheme::orca;
            record.submixture = submixture;
            record.system_message_id = message_id;
            record.instruction = query.text;
            record.expected = query.target;
            record.id = corpus::make_record_id(record.scheme, record.instruction);
            if (!seen_ids.insert(record.id).second) continue;
            record.response = client.generate({std::nullopt, prompt}, config.generation_params);
            result.records.push_back(std::move(record));
        }
    }
    return result;
}

sampler::TaskPool load_task_pool(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ArgumentError("cannot open task pool file: " + path.string());
    }
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("malformed task pool: " + std::string(e.what()), e.byte);
    }
    sampler::TaskPool pool;
    if (!j.is_object() || !j.contains("tasks") || !j["tasks"].is_object()) {
        throw ValidationError("task pool file must contain a 'tasks' object");
    }
    for (const auto& [name, queries] : j["tasks"].items()) {
        std::vector<sampler::Query> list;
        for (const auto& qj : queries) {
            sampler::Query query;
            query.id = qj.at("id").get<std::string>();
            query.text = qj.at("query").get<std::string>();
            query.target = qj.at("target").get<std::string>();
            list.push_back(std::move(query));
        }
        pool.tasks[name] = std::move(list);
    }
    pool.validate();
    return pool;
}

std::map<corpus::Submixture, sampler::TaskPool> load_pools(const std::filesystem::path& dir) {
    std::map<corpus::Submixture, sampler::TaskPool> pools;
    for (const corpus::Submixture submixture : corpus::kAllSubmixtures) {
        const auto path = dir / (std::string(corpus::to_string(submixture)) + ".json");
        if (std::filesystem::exists(path)) {
            pools[submixture] = load_task_pool(path);
        }
    }
    if (pools.empty()) {
        throw ArgumentError("no <submixture>.json pool files found in " + dir.string());
    }
    return pools;
}

DedupOutcome dedup_against_seeds(std::span<const corpus::InstructionRecord> candidates,
                                 std::span<const corpus::InstructionRecord> seeds,
                                 double ratio_threshold, std::size_t distance_threshold,
                                 bool pairwise) {
    const std::vector<std::string> seed_texts = seed_instructions(seeds);

    DedupOutcome outcome;
    std::vector<std::string> kept_texts;
    for (const auto& candidate : candidates) {
        std::optional<ordered_json> removal;
        if (!seed_texts.empty()) {
            const auto [nearest, ratio] = simtext::find_nearest(seed_texts, candidate.instruction);
            const auto verdict =
                simtext::is_near_duplicate(candidate.instruction, seed_texts[nearest],
                                           ratio_threshold, distance_threshold);
            if (verdict.duplicate) {
                removal = ordered_json{{"id", candidate.id},
                                       {"matched", seeds[nearest].id},
                                       {"kind", "seed"},
                                       {"ratio", verdict.ratio},
                                       {"distance", verdict.distance}};
            }
        }
        if (!removal && pairwise && !kept_texts.empty()) {
            const auto [nearest, ratio] = simtext::find_nearest(kept_texts, candidate.instruction);
            const auto verdict =
                simtext::is_near_duplicate(candidate.instruction, kept_texts[nearest],
                                           ratio_threshold, distance_threshold);
            if (verdict.duplicate) {
                removal = ordered_json{{"id", candidate.id},
                                       {"matched", outcome.kept[nearest].id},
                                       {"kind", "candidate"},
                                       {"ratio", verdict.ratio},
                                       {"distance", verdict.distance}};
            }
        }
        if (removal) {
            outcome.removed.push_back(std::move(*removal));
        } else {
            kept_texts.push_back(candidate.instruction);
            outcome.kept.push_back(candidate);
        }
    }
    return outcome;
}

void write_jsonl(const std::filesystem::path& path,
                 std::span<const nlohmann::ordered_json> rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ArgumentError("cannot open output file: " + path.string());
    }
    for (const auto& row : rows) {
        out << row.dump() << '\n';
    }
}

}  // namespace forge::pipeline
