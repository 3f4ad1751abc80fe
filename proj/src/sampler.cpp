#include "forge/sampler.hpp"

#include "forge/errors.hpp"

#include <algorithm>
#include <set>

namespace forge::sampler {

std::size_t TaskPool::total() const {
    std::size_t n = 0;
    for (const auto& [name, queries] : tasks) {
        n += queries.size();
    }
    return n;
}

void TaskPool::validate() const {
    for (const auto& [name, queries] : tasks) {
        std::set<std::string> ids;
        for (const auto& query : queries) {
            if (!ids.insert(query.id).second) {
                throw ValidationError("duplicate query id '" + query.id + "' in task '" + name +
                                      "'");
            }
        }
    }
}

const SystemMessageTable& SystemMessageTable::builtin() {
    static const SystemMessageTable table = [] {
        SystemMessageTable t;
        const auto add = [&t](corpus::Submixture m, std::vector<int> ids) {
            Row row;
            row.weights.assign(ids.size(), 1.0 / static_cast<double>(ids.size()));
            row.ids = std::move(ids);
            t.rows[m] = std::move(row);
        };
        add(corpus::Submixture::cot, {6, 11, 16});
        add(corpus::Submixture::niv2, {1, 2, 5, 7, 9, 12, 13, 14, 15, 16});
        add(corpus::Submixture::t0, {1, 2, 3, 5, 7});
        add(corpus::Submixture::flan2021, {3, 4, 7, 8, 9});
        return t;
    }();
    return table;
}

std::vector<Query> sample_flan_queries(const TaskPool& pool, std::size_t n, Rng& rng) {
    if (n > pool.total()) {
        throw ArgumentError("cannot sample " + std::to_string(n) + " queries from a pool of " +
                            std::to_string(pool.total()));
    }
    pool.validate();

    // Mutable working copy, tasks in name order for determinism.
    std::vector<std::vector<Query>> remaining;
    remaining.reserve(pool.tasks.size());
    for (const auto& [name, queries] : pool.tasks) {
        if (!queries.empty()) {
            remaining.push_back(queries);
        }
    }

    std::vector<Query> out;
    out.reserve(n);
    while (out.size() < n) {
        const std::size_t t = rng.below(remaining.size());
        auto& task = remaining[t];
        const std::size_t q = rng.below(task.size());
        out.push_back(std::move(task[q]));
        task[q] = std::move(task.back());
        task.pop_back();
        if (task.empty()) {
            remaining[t] = std::move(remaining.back());
            remaining.pop_back();
        }
    }
    return out;
}

TaskPool cap_per_subtask(const TaskPool& pool, std::size_t cap, Rng& rng) {
    if (cap < 1) {
        throw ArgumentError("cap must be at least 1");
    }
    TaskPool capped;
    for (const auto& [name, queries] : pool.tasks) {
        if (queries.size() <= cap) {
            capped.tasks[name] = queries;
            continue;
        }
        auto picked = rng.sample_indices(queries.size(), cap);
        std::sort(picked.begin(), picked.end());
        std::vector<Query> kept;
        kept.reserve(cap);
        for (std::size_t index : picked) {
            kept.push_back(queries[index]);
        }
        capped.tasks[name] = std::move(kept);
    }
    return capped;
}

int sample_system_message(corpus::Submixture submixture, Rng& rng) {
    const auto& rows = SystemMessageTable::builtin().rows;
    const auto it = rows.find(submixture);
    if (it == rows.end()) {
        throw ArgumentError("no system-message row for submixture");
    }
    const auto& ids = it->second.ids;
    return ids[rng.below(ids.size())];
}

EvolAction choose_evol_action(Rng& rng) {
    EvolAction action;
    action.strategy = rng.below(2) == 0 ? corpus::EvolStrategy::in_depth
                                        : corpus::EvolStrategy::in_breadth;
    if (action.strategy == corpus::EvolStrategy::in_depth) {
        static constexpr std::array<corpus::EvolOperation, 4> kOps = {
            corpus::EvolOperation::add_constraints,
            corpus::EvolOperation::deepening,
            corpus::EvolOperation::concretizing,
            corpus::EvolOperation::increase_reasoning,
        };
        action.operation = kOps[rng.below(kOps.size())];
    }
    return action;
}

std::vector<corpus::InstructionRecord> sample_seed_examples(
    std::span<const corpus::InstructionRecord> dataset,
    std::optional<corpus::Category> category, std::size_t k, Rng& rng) {
    std::map<corpus::Category, std::vector<std::size_t>> by_category;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (dataset[i].category) {
            by_category[*dataset[i].category].push_back(i);
        }
    }

    corpus::Category chosen;
    if (category) {
        chosen = *category;
    } else {
        std::vector<corpus::Category> eligible;
        for (const auto& [cat, indices] : by_category) {
            if (indices.size() >= k) {
                eligible.push_back(cat);
            }
        }
        if (eligible.empty()) {
            throw ArgumentError("no category has at least " + std::to_string(k) + " records");
        }
        chosen = eligible[rng.below(eligible.size())];
    }

    const auto it = by_category.find(chosen);
    const std::size_t available = it == by_category.end() ? 0 : it->second.size();
    if (available < k) {
        throw ArgumentError("category '" + std::string(corpus::to_string(chosen)) + "' has " +
                            std::to_string(available) + " records, need " + std::to_string(k));
    }

    std::vector<corpus::InstructionRecord> out;
    out.reserve(k);
    for (std::size_t index : rng.sample_indices(available, k)) {
        out.push_back(dataset[it->second[index]]);
    }
    return out;
}

}  // namespace forge::sampler
