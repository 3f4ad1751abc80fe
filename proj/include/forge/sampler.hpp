#pragma once

#include "forge/corpus.hpp"
#include "forge/rng.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace forge::sampler {

struct Query {
    std::string id;
    std::string text;    // the zero-shot query
    std::string target;  // the reference answer
};

// Tasks of one submixture, each holding its query inventory.
struct TaskPool {
    std::map<std::string, std::vector<Query>> tasks;

    std::size_t total() const;
    // Throws ValidationError on duplicate query ids within a task.
    void validate() const;
};

// Allowed system-message ids per submixture, sampled uniformly.
struct SystemMessageTable {
    struct Row {
        std::vector<int> ids;
        std::vector<double> weights;  // normalized, sums to 1
    };
    std::map<corpus::Submixture, Row> rows;

    static const SystemMessageTable& builtin();
};

// Draws n queries: uniform task, then uniform query without replacement
// within the task; exhausted tasks drop out of further draws. No query is
// drawn twice. Throws ArgumentError when n exceeds the pool size.
std::vector<Query> sample_flan_queries(const TaskPool& pool, std::size_t n, Rng& rng);

// Truncates each task to at most cap queries by uniform sampling without
// replacement (original order kept). Throws ArgumentError when cap < 1.
TaskPool cap_per_subtask(const TaskPool& pool, std::size_t cap, Rng& rng);

// Uniform draw from the submixture's allowed system-message ids.
int sample_system_message(corpus::Submixture submixture, Rng& rng);

struct EvolAction {
    corpus::EvolStrategy strategy;
    std::optional<corpus::EvolOperation> operation;  // present iff in_depth
};

// Uniform strategy; for in-depth, a uniform choice among the four
// operations. Called once per evolution batch: the action applies to every
// instruction in that epoch.
EvolAction choose_evol_action(Rng& rng);

// k distinct records from one category; the category is drawn uniformly
// among those with at least k records when not given.
std::vector<corpus::InstructionRecord> sample_seed_examples(
    std::span<const corpus::InstructionRecord> dataset,
    std::optional<corpus::Category> category, std::size_t k, Rng& rng);

}  // namespace forge::sampler
