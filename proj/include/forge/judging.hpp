#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace forge::judging {

enum class Turn { first, second };
enum class Winner { a, b, tie };
enum class Setup { s1, s2 };

struct SingleGrade {
    std::string question_id;
    Turn turn = Turn::first;
    std::string model;
    double score = 0.0;                     // 1..10
    std::optional<std::string> reference;   // reference answer, if judged with one
};

struct PairwiseJudgment {
    std::string question_id;
    Turn turn = Turn::first;
    std::string model_a;  // (model_a, model_b) kept in lexicographic order
    std::string model_b;
    Winner winner = Winner::tie;
    std::string judge;
};

struct AgreementReport {
    Setup setup = Setup::s1;
    Turn turn = Turn::first;
    std::optional<double> pct;  // absent when compared_count == 0
    std::size_t agreed_count = 0;
    std::size_t compared_count = 0;
};

std::string_view to_string(Turn t);
std::string_view to_string(Winner w);
std::string_view to_string(Setup s);
Turn turn_from_string(std::string_view s);
Winner winner_from_string(std::string_view s);
Setup setup_from_string(std::string_view s);

// Converts single-answer grades of one question+turn into every possible
// answer pair: C(k,2) judgments, higher score wins, equal scores tie.
// Throws ValidationError on duplicate model entries or mixed keys.
std::vector<PairwiseJudgment> to_pairwise(std::span<const SingleGrade> grades,
                                          const std::string& judge);

// Agreement between two judges over the given turn. Only comparisons keyed
// present in both sides count. S1 treats tie as its own vote; S2 first drops
// comparisons where either judge voted tie.
AgreementReport agreement(std::span<const PairwiseJudgment> a,
                          std::span<const PairwiseJudgment> b, Setup setup, Turn turn);

// Majority vote per (question, turn, pair); exact ties become tie votes.
std::vector<PairwiseJudgment> majority_vote(std::span<const PairwiseJudgment> judgments,
                                            const std::string& judge_label);

struct ModelAggregate {
    std::optional<double> first_turn;   // mean over first-turn grades
    std::optional<double> second_turn;  // mean over second-turn grades
    double average = 0.0;               // mean over all grades (canonical)
    double average_of_turn_means = 0.0; // alternative aggregation, reported too
    std::size_t grade_count = 0;
    // category -> [first, second] means and the per-grade overall mean
    std::map<std::string, std::array<std::optional<double>, 2>> per_category_turn;
    std::map<std::string, double> per_category;
};

struct MtBenchReport {
    std::map<std::string, ModelAggregate> models;
};

// Per-category/per-turn means plus overall averages per model. Every
// question must be mapped to a category.
MtBenchReport mtbench_aggregate(std::span<const SingleGrade> grades,
                                const std::map<std::string, std::string>& categories);

// Text table: model, first turn, second turn, average (2 decimals).
std::string render_average_table(const MtBenchReport& report);

// Text table with S1/S2 columns per labeled judge pair; each cell shows the
// integer-rounded percentage above the agreed-votes count.
struct AgreementCell {
    std::string label;
    AgreementReport s1;
    AgreementReport s2;
};
std::string render_agreement_table(std::span<const AgreementCell> cells, Turn turn);

// Radar-plot data: category,model,score rows.
std::string radar_csv(const MtBenchReport& report);

nlohmann::ordered_json report_to_json(const MtBenchReport& report);
nlohmann::ordered_json agreement_to_json(const AgreementReport& report);

// JSONL files of grades / judgments.
std::vector<SingleGrade> load_grades(const std::filesystem::path& path);
std::vector<PairwiseJudgment> load_judgments(const std::filesystem::path& path);
void write_judgments(const std::filesystem::path& path,
                     std::span<const PairwiseJudgment> judgments);
SingleGrade grade_from_json(const nlohmann::ordered_json& j);
PairwiseJudgment judgment_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json judgment_to_json(const PairwiseJudgment& judgment);

}  // namespace forge::judging
