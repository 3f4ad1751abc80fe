#pragma once

#include "forge/corpus.hpp"
#include "forge/llm.hpp"
#include "forge/sampler.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace forge::pipeline {

// How one submixture's pool is turned into a query list.
struct OrcaSubmixPlan {
    bool apply_cap = false;   // cap queries per subtask first
    bool algorithm1 = false;  // then sample task-uniformly without replacement
    std::optional<std::size_t> sample_n;  // draw count; whole pool when absent
};

struct PipelineConfig {
    std::uint64_t master_seed = 0;
    llm::BackendConfig backend;

    // Scheme parameters. Seeds-per-prompt and examples-per-request are fixed
    // by the prompt templates and recorded here for reference.
    int seeds_per_prompt = 3;
    int examples_per_iter = 5;
    int lamini_iterations = 20;
    double topic_guided_probability = 0.5;
    std::vector<std::string> topics;
    int evol_subset_size = 100;
    int evol_max_epochs = 2;
    int orca_subtask_cap = 3;
    std::map<corpus::Submixture, OrcaSubmixPlan> orca_plan;

    double dedup_ratio_threshold = 0.6;
    std::size_t dedup_distance_threshold = 9;

    llm::GenerationParams generation_params = llm::generation_defaults();
    llm::GenerationParams judging_params = llm::judge_defaults();

    PipelineConfig();

    void validate() const;
    static PipelineConfig from_json(const nlohmann::ordered_json& j);
    static PipelineConfig from_file(const std::filesystem::path& path);
    nlohmann::ordered_json to_json() const;
};

struct LaminiResult {
    std::vector<corpus::InstructionRecord> records;
    std::vector<nlohmann::ordered_json> anomalies;  // bulk preambles, tagless completions
    std::vector<nlohmann::ordered_json> dropped;    // near-duplicates of seeds
};

// Iterative example-guided generation: sample seeds, maybe topics, build the
// prompt, extract examples, drop near-duplicates of the seed set, then
// generate responses for the survivors.
LaminiResult run_lamini(const PipelineConfig& config,
                        std::span<const corpus::InstructionRecord> seed_dataset,
                        llm::Client& client);

struct EvolResult {
    std::vector<corpus::InstructionRecord> records;
    std::vector<nlohmann::ordered_json> eliminated;  // failed evolutions
};

// Per category: sample a subset, evolve it for one or two epochs with one
// action per epoch, keep evolutions judged not-equal to their parent, record
// lineage, then generate responses.
EvolResult run_evol(const PipelineConfig& config,
                    std::span<const corpus::InstructionRecord> seed_dataset,
                    llm::Client& client);

struct OrcaResult {
    std::vector<corpus::InstructionRecord> records;
};

// Per submixture: optional per-subtask cap, optional task-uniform sampling,
// then a sampled system message and an explanation prompt per query.
OrcaResult run_orca(const PipelineConfig& config,
                    const std::map<corpus::Submixture, sampler::TaskPool>& pools,
                    llm::Client& client);

// {"tasks": {"name": [{"id","query","target"}, ...]}}
sampler::TaskPool load_task_pool(const std::filesystem::path& path);
// Reads <submixture>.json files from a directory.
std::map<corpus::Submixture, sampler::TaskPool> load_pools(const std::filesystem::path& dir);

struct DedupOutcome {
    std::vector<corpus::InstructionRecord> kept;
    std::vector<nlohmann::ordered_json> removed;  // sidecar report rows
};

// Candidate-vs-seed near-duplicate filtering; pairwise additionally checks
// candidates against already-kept candidates.
DedupOutcome dedup_against_seeds(std::span<const corpus::InstructionRecord> candidates,
                                 std::span<const corpus::InstructionRecord> seeds,
                                 double ratio_threshold, std::size_t distance_threshold,
                                 bool pairwise = false);

void write_jsonl(const std::filesystem::path& path,
                 std::span<const nlohmann::ordered_json> rows);

}  // namespace forge::pipeline
