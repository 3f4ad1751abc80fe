#include "forge/corpus.hpp"
#include "forge/errors.hpp"
#include "forge/filter.hpp"
#include "forge/judging.hpp"
#include "forge/llm.hpp"
#include "forge/pipeline.hpp"
#include "forge/prefalign.hpp"
#include "forge/rng.hpp"
#include "forge/simtext.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace {

using namespace forge;
using nlohmann::ordered_json;

constexpr const char* kToolVersion = "forge/0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitBackend = 2;
constexpr int kExitValidation = 3;

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;
    std::optional<std::string> backend_url;
    std::optional<std::string> model;
    std::optional<std::string> cache_path;
    std::optional<double> requests_per_second;
};

// Precedence: config file < environment < command line flags.
pipeline::PipelineConfig resolve_config(const GlobalOptions& options) {
    pipeline::PipelineConfig config;
    if (!options.config_path.empty()) {
        config = pipeline::PipelineConfig::from_file(options.config_path);
    }
    const auto env = llm::BackendConfig::from_env();
    if (!env.url.empty()) config.backend.url = env.url;
    if (!env.api_key.empty()) config.backend.api_key = env.api_key;
    if (std::getenv("FORGE_MODE") != nullptr) config.backend.mode = env.mode;
    if (options.seed) config.master_seed = *options.seed;
    if (options.mode) config.backend.mode = llm::mode_from_string(*options.mode);
    if (options.backend_url) config.backend.url = *options.backend_url;
    if (options.model) config.backend.model = *options.model;
    if (options.cache_path) config.backend.cache_path = *options.cache_path;
    if (options.requests_per_second) {
        config.backend.requests_per_second = *options.requests_per_second;
    }
    return config;
}

corpus::FileHeader header_for(const pipeline::PipelineConfig& config) {
    corpus::FileHeader header;
    header.seed = config.master_seed;
    header.rng_algorithm = Rng::kAlgorithm;
    header.tool = kToolVersion;
    return header;
}

void write_json_file(const std::filesystem::path& path, const ordered_json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ArgumentError("cannot open output file: " + path.string());
    }
    out << j.dump(2) << '\n';
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ArgumentError("cannot open output file: " + path.string());
    }
    out << text;
}

std::map<std::string, std::string> load_category_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ArgumentError("cannot open categories file: " + path.string());
    }
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("malformed categories file: " + std::string(e.what()), e.byte);
    }
    std::map<std::string, std::string> categories;
    for (const auto& [question, category] : j.items()) {
        categories[question] = category.get<std::string>();
    }
    return categories;
}

// Central finite differences over the policy logits, reported by dpo-demo.
double gradient_check_max_rel_error(const prefalign::TabularPolicy& policy,
                                    const prefalign::TabularPolicy& ref,
                                    std::span<const prefalign::PreferenceTriple> data,
                                    double beta) {
    const auto analytic = prefalign::dpo_loss_and_grad(policy, ref, data, beta);
    double scale = 0.0;
    for (double g : analytic.grad) scale = std::max(scale, std::abs(g));
    prefalign::TabularPolicy probe = policy;
    const double step = 1e-5;
    double worst = 0.0;
    for (std::size_t i = 0; i < probe.logits.size(); ++i) {
        const double original = probe.logits[i];
        probe.logits[i] = original + step;
        const double up = prefalign::dpo_loss_and_grad(probe, ref, data, beta).loss;
        probe.logits[i] = original - step;
        const double down = prefalign::dpo_loss_and_grad(probe, ref, data, beta).loss;
        probe.logits[i] = original;
        const double numeric = (up - down) / (2.0 * step);
        worst = std::max(worst, std::abs(numeric - analytic.grad[i]) / std::max(scale, 1e-8));
    }
    return worst;
}

int run(int argc, char** argv) {
    CLI::App app{"Synthetic instruction-dataset toolkit: generation schemes, near-duplicate "
                 "filtering, judge-based rejection sampling, a tabular DPO kit and "
                 "judge-agreement reports"};
    app.require_subcommand(1);

    GlobalOptions global;
    app.add_option("--config", global.config_path, "JSON config file");
    app.add_option("--seed", global.seed, "master seed (recorded in output headers)");
    app.add_option("--mode", global.mode, "backend mode: live|record|replay");
    app.add_option("--backend-url", global.backend_url, "chat-completions backend url");
    app.add_option("--model", global.model, "backend model name");
    app.add_option("--cache", global.cache_path, "completion transcript cache file");
    app.add_option("--rps", global.requests_per_second,
                   "request rate limit per second (0 disables)");

    // gen-lamini ----------------------------------------------------------
    auto* gen_lamini = app.add_subcommand("gen-lamini", "example-guided instruction generation");
    std::string lamini_seeds, lamini_out, lamini_anomalies, lamini_dropped;
    std::optional<int> lamini_iterations;
    gen_lamini->add_option("--seeds", lamini_seeds, "seed dataset (.jsonl)")->required();
    gen_lamini->add_option("--out", lamini_out, "output dataset (.jsonl)")->required();
    gen_lamini->add_option("--anomalies", lamini_anomalies, "anomaly sidecar (.jsonl)");
    gen_lamini->add_option("--dropped", lamini_dropped, "near-duplicate sidecar (.jsonl)");
    gen_lamini->add_option("--iterations", lamini_iterations, "generation iterations");

    // gen-evol ------------------------------------------------------------
    auto* gen_evol = app.add_subcommand("gen-evol", "instruction evolution");
    std::string evol_seeds, evol_out, evol_eliminated;
    gen_evol->add_option("--seeds", evol_seeds, "seed dataset (.jsonl)")->required();
    gen_evol->add_option("--out", evol_out, "output dataset (.jsonl)")->required();
    gen_evol->add_option("--eliminated", evol_eliminated, "eliminated-evolutions sidecar");

    // gen-orca ------------------------------------------------------------
    auto* gen_orca = app.add_subcommand("gen-orca", "explanation tuning over task pools");
    std::string orca_pool_dir, orca_out;
    gen_orca->add_option("--pool-dir", orca_pool_dir, "directory of <submixture>.json pools")
        ->required();
    gen_orca->add_option("--out", orca_out, "output dataset (.jsonl)")->required();

    // dedup ----------------------------------------------------------------
    auto* dedup = app.add_subcommand("dedup", "near-duplicate filtering against a seed set");
    std::string dedup_in, dedup_seeds, dedup_out, dedup_report;
    double dedup_ratio = simtext::kDefaultRatioThreshold;
    std::size_t dedup_distance = simtext::kDefaultDistanceThreshold;
    bool dedup_pairwise = false;
    dedup->add_option("--in", dedup_in, "candidate dataset (.jsonl)")->required();
    dedup->add_option("--seeds", dedup_seeds, "seed dataset (.jsonl)")->required();
    dedup->add_option("--out", dedup_out, "kept records (.jsonl)")->required();
    dedup->add_option("--report", dedup_report, "removed-records report (.jsonl)");
    dedup->add_option("--ratio", dedup_ratio, "similarity ratio threshold (inclusive)");
    dedup->add_option("--distance", dedup_distance, "edit distance threshold (inclusive)");
    dedup->add_flag("--pairwise", dedup_pairwise, "also compare candidates to each other");

    // filter ----------------------------------------------------------------
    auto* filter_cmd = app.add_subcommand("filter", "judge-based rejection sampling");
    std::string filter_in, filter_accepted, filter_rejected, filter_undecided, filter_stats;
    std::string filter_name = "dataset";
    int min_rating = 0;
    bool paper_verbatim = false;
    filter_cmd->add_option("--in", filter_in, "dataset to judge (.jsonl)")->required();
    filter_cmd->add_option("--out-accepted", filter_accepted, "accepted records")->required();
    filter_cmd->add_option("--out-rejected", filter_rejected, "rejected records")->required();
    filter_cmd->add_option("--out-undecided", filter_undecided, "undecided records")->required();
    filter_cmd->add_option("--stats", filter_stats, "stats JSON output");
    filter_cmd->add_option("--name", filter_name, "dataset label for the stats table");
    filter_cmd->add_option("--min-rating", min_rating,
                           "demote accepted records rated below this (0 = off)");
    filter_cmd->add_flag("--paper-verbatim", paper_verbatim,
                         "emit the historical malformed rating tag in the judge prompt");

    // stats ------------------------------------------------------------------
    auto* stats_cmd = app.add_subcommand("stats", "descriptive dataset statistics");
    std::string stats_in, stats_out;
    stats_cmd->add_option("--in", stats_in, "dataset (.jsonl)")->required();
    stats_cmd->add_option("--out", stats_out, "stats JSON output");

    // dpo-demo ----------------------------------------------------------------
    auto* dpo_demo = app.add_subcommand("dpo-demo",
                                        "tabular preference-optimization demonstration");
    std::size_t demo_prompts = 10, demo_responses = 8, demo_triples = 2000;
    double demo_beta = 0.1, demo_lr = 0.1;
    int demo_epochs = 500;
    std::string demo_report;
    dpo_demo->add_option("--prompts", demo_prompts, "number of prompts");
    dpo_demo->add_option("--responses", demo_responses, "responses per prompt");
    dpo_demo->add_option("--triples", demo_triples, "sampled preference triples");
    dpo_demo->add_option("--beta", demo_beta, "KL strength");
    dpo_demo->add_option("--learning-rate", demo_lr, "gradient descent step size");
    dpo_demo->add_option("--epochs", demo_epochs, "full-batch epochs");
    dpo_demo->add_option("--report", demo_report, "report JSON output");

    // pairwise -----------------------------------------------------------------
    auto* pairwise_cmd =
        app.add_subcommand("pairwise", "convert single-answer grades to pairwise judgments");
    std::string pairwise_grades, pairwise_judge = "converted", pairwise_out;
    pairwise_cmd->add_option("--grades", pairwise_grades, "grade file (.jsonl)")->required();
    pairwise_cmd->add_option("--judge", pairwise_judge, "judge label for the output");
    pairwise_cmd->add_option("--out", pairwise_out, "judgment file (.jsonl)")->required();

    // agreement -----------------------------------------------------------------
    auto* agreement_cmd = app.add_subcommand("agreement", "inter-judge agreement (S1/S2)");
    std::string agree_a, agree_b, agree_out, agree_majority = "none", agree_label = "judge-b";
    agreement_cmd->add_option("--a", agree_a, "first judgment file")->required();
    agreement_cmd->add_option("--b", agree_b, "second judgment file")->required();
    agreement_cmd->add_option("--out", agree_out, "report JSON output");
    agreement_cmd->add_option("--majority", agree_majority,
                              "reduce one side by majority vote: none|a|b|both");
    agreement_cmd->add_option("--label", agree_label, "row label for the rendered table");

    // mtbench-report ---------------------------------------------------------------
    auto* mtbench_cmd = app.add_subcommand("mtbench-report", "score aggregation per turn");
    std::string mtbench_grades, mtbench_categories, mtbench_out, mtbench_radar;
    mtbench_cmd->add_option("--grades", mtbench_grades, "grade file (.jsonl)")->required();
    mtbench_cmd->add_option("--categories", mtbench_categories,
                            "JSON map question_id -> category")->required();
    mtbench_cmd->add_option("--out", mtbench_out, "report JSON output");
    mtbench_cmd->add_option("--radar", mtbench_radar, "radar CSV output");

    // Let global flags appear after the subcommand name too.
    for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints the message or the help text
        return code == 0 ? kExitOk : kExitUsage;
    }

    const auto config_base = resolve_config(global);

    if (gen_lamini->parsed()) {
        auto config = config_base;
        if (lamini_iterations) config.lamini_iterations = *lamini_iterations;
        llm::Client client(config.backend);
        const auto seeds = corpus::load_dataset(lamini_seeds);
        const auto result = pipeline::run_lamini(config, seeds, client);
        corpus::write_dataset(lamini_out, result.records, header_for(config));
        if (!lamini_anomalies.empty()) pipeline::write_jsonl(lamini_anomalies, result.anomalies);
        if (!lamini_dropped.empty()) pipeline::write_jsonl(lamini_dropped, result.dropped);
        std::cout << "wrote " << result.records.size() << " records (" << result.dropped.size()
                  << " near-duplicates dropped, " << result.anomalies.size() << " anomalies)\n";
        return kExitOk;
    }

    if (gen_evol->parsed()) {
        llm::Client client(config_base.backend);
        const auto seeds = corpus::load_dataset(evol_seeds);
        const auto result = pipeline::run_evol(config_base, seeds, client);
        corpus::write_dataset(evol_out, result.records, header_for(config_base));
        if (!evol_eliminated.empty()) pipeline::write_jsonl(evol_eliminated, result.eliminated);
        std::cout << "wrote " << result.records.size() << " records ("
                  << result.eliminated.size() << " evolutions eliminated)\n";
        return kExitOk;
    }

    if (gen_orca->parsed()) {
        llm::Client client(config_base.backend);
        const auto pools = pipeline::load_pools(orca_pool_dir);
        const auto result = pipeline::run_orca(config_base, pools, client);
        corpus::write_dataset(orca_out, result.records, header_for(config_base));
        const auto stats = corpus::dataset_stats(result.records);
        std::cout << "wrote " << result.records.size() << " records\n";
        for (const auto& [submixture, count] : stats.per_submixture) {
            std::cout << "  " << submixture << ": " << count << '\n';
        }
        return kExitOk;
    }

    if (dedup->parsed()) {
        const auto candidates = corpus::load_dataset(dedup_in);
        const auto seeds = corpus::load_dataset(dedup_seeds);
        const auto outcome = pipeline::dedup_against_seeds(candidates, seeds, dedup_ratio,
                                                           dedup_distance, dedup_pairwise);
        corpus::write_dataset(dedup_out, outcome.kept, header_for(config_base));
        if (!dedup_report.empty()) pipeline::write_jsonl(dedup_report, outcome.removed);
        std::cout << "kept " << outcome.kept.size() << ", removed " << outcome.removed.size()
                  << '\n';
        return kExitOk;
    }

    if (filter_cmd->parsed()) {
        llm::Client client(config_base.backend);
        const auto records = corpus::load_dataset(filter_in);
        auto judged =
            filter::judge_dataset(records, client, config_base.judging_params, paper_verbatim);
        if (min_rating > 0) judged = filter::demote_low_ratings(judged, min_rating);
        const auto stats = filter::summarize(judged);
        const auto parts = filter::partition(judged);
        corpus::write_dataset(filter_accepted, parts.accepted, header_for(config_base));
        corpus::write_dataset(filter_rejected, parts.rejected, header_for(config_base));
        corpus::write_dataset(filter_undecided, parts.undecided, header_for(config_base));
        if (!filter_stats.empty()) write_json_file(filter_stats, filter::stats_to_json(stats));
        const std::vector<std::pair<std::string, filter::FilterStats>> rows = {
            {filter_name, stats}};
        std::cout << filter::render_stats_table(rows);
        return kExitOk;
    }

    if (stats_cmd->parsed()) {
        const auto records = corpus::load_dataset(stats_in);
        const auto j = corpus::stats_to_json(corpus::dataset_stats(records));
        if (!stats_out.empty()) write_json_file(stats_out, j);
        std::cout << j.dump(2) << '\n';
        return kExitOk;
    }

    if (dpo_demo->parsed()) {
        Rng rng(config_base.master_seed);
        const auto ref = prefalign::TabularPolicy::uniform(demo_prompts, demo_responses);
        const auto latent = prefalign::RewardTable::random(demo_prompts, demo_responses, rng, 2.0);
        const auto data = prefalign::sample_preference_dataset(latent, ref, demo_triples, rng);

        prefalign::DpoConfig dpo_config;
        dpo_config.beta = demo_beta;
        dpo_config.learning_rate = demo_lr;
        dpo_config.epochs = demo_epochs;
        const auto result = prefalign::train_dpo(ref, ref, data, dpo_config);

        const double grad_error = gradient_check_max_rel_error(result.policy, ref, data,
                                                               demo_beta);
        std::size_t agree = 0;
        for (std::size_t x = 0; x < demo_prompts; ++x) {
            std::size_t latent_best = 0, implicit_best = 0;
            double best_latent = latent(x, 0);
            double best_implicit =
                prefalign::implicit_reward(result.policy, ref, x, 0, demo_beta);
            for (std::size_t y = 1; y < demo_responses; ++y) {
                if (latent(x, y) > best_latent) {
                    best_latent = latent(x, y);
                    latent_best = y;
                }
                const double r = prefalign::implicit_reward(result.policy, ref, x, y, demo_beta);
                if (r > best_implicit) {
                    best_implicit = r;
                    implicit_best = y;
                }
            }
            if (latent_best == implicit_best) ++agree;
        }

        ordered_json report;
        report["seed"] = config_base.master_seed;
        report["prompts"] = demo_prompts;
        report["responses"] = demo_responses;
        report["triples"] = demo_triples;
        report["beta"] = demo_beta;
        report["learning_rate"] = demo_lr;
        report["epochs"] = demo_epochs;
        report["loss_first"] = result.loss_trace.front();
        report["loss_last"] = result.loss_trace.back();
        report["loss_trace"] = result.loss_trace;
        report["gradient_check_max_rel_error"] = grad_error;
        report["argmax_agreement"] =
            static_cast<double>(agree) / static_cast<double>(demo_prompts);
        if (!demo_report.empty()) write_json_file(demo_report, report);
        std::cout << "loss " << result.loss_trace.front() << " -> " << result.loss_trace.back()
                  << ", gradient check max rel error " << grad_error << ", argmax agreement "
                  << report["argmax_agreement"].get<double>() << '\n';
        return kExitOk;
    }

    if (pairwise_cmd->parsed()) {
        const auto grades = judging::load_grades(pairwise_grades);
        // Group per (question, turn) and convert each group.
        std::map<std::pair<std::string, judging::Turn>, std::vector<judging::SingleGrade>> groups;
        for (const auto& grade : grades) {
            groups[{grade.question_id, grade.turn}].push_back(grade);
        }
        std::vector<judging::PairwiseJudgment> judgments;
        for (const auto& [key, group] : groups) {
            const auto converted = judging::to_pairwise(group, pairwise_judge);
            judgments.insert(judgments.end(), converted.begin(), converted.end());
        }
        judging::write_judgments(pairwise_out, judgments);
        std::cout << "wrote " << judgments.size() << " judgments\n";
        return kExitOk;
    }

    if (agreement_cmd->parsed()) {
        auto a = judging::load_judgments(agree_a);
        auto b = judging::load_judgments(agree_b);
        if (agree_majority == "a" || agree_majority == "both") {
            a = judging::majority_vote(a, "majority");
        }
        if (agree_majority == "b" || agree_majority == "both") {
            b = judging::majority_vote(b, "majority");
        } else if (agree_majority != "none" && agree_majority != "a") {
            throw ArgumentError("--majority must be none|a|b|both");
        }
        ordered_json report;
        for (const judging::Turn turn : {judging::Turn::first, judging::Turn::second}) {
            judging::AgreementCell cell;
            cell.label = agree_label;
            cell.s1 = judging::agreement(a, b, judging::Setup::s1, turn);
            cell.s2 = judging::agreement(a, b, judging::Setup::s2, turn);
            std::cout << judging::render_agreement_table(
                std::vector<judging::AgreementCell>{cell}, turn);
            ordered_json tj;
            tj["S1"] = judging::agreement_to_json(cell.s1);
            tj["S2"] = judging::agreement_to_json(cell.s2);
            report[std::string(judging::to_string(turn))] = std::move(tj);
        }
        if (!agree_out.empty()) write_json_file(agree_out, report);
        return kExitOk;
    }

    if (mtbench_cmd->parsed()) {
        const auto grades = judging::load_grades(mtbench_grades);
        const auto categories = load_category_map(mtbench_categories);
        const auto report = judging::mtbench_aggregate(grades, categories);
        std::cout << judging::render_average_table(report);
        if (!mtbench_out.empty()) write_json_file(mtbench_out, judging::report_to_json(report));
        if (!mtbench_radar.empty()) write_text_file(mtbench_radar, judging::radar_csv(report));
        return kExitOk;
    }

    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const forge::BackendError& e) {
        std::cerr << "backend error: " << e.what() << '\n';
        return kExitBackend;
    } catch (const forge::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const forge::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const forge::ArgumentError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}
