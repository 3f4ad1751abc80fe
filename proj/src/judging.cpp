#include "forge/judging.hpp"

#include "forge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace forge::judging {

namespace {

using nlohmann::ordered_json;

std::string pair_key(const PairwiseJudgment& j) {
    return j.question_id + '\x1f' + j.model_a + '\x1f' + j.model_b;
}

std::string format_fixed(double value, int decimals, int width = 0) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%*.*f", width, decimals, value);
    return buf;
}

std::string pad_right(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

std::string pad_left(const std::string& s, std::size_t width) {
    if (s.size() >= width) return s;
    return std::string(width - s.size(), ' ') + s;
}

std::map<std::string, Winner> keyed_winners(std::span<const PairwiseJudgment> judgments,
                                            Turn turn) {
    std::map<std::string, Winner> out;
    for (const auto& j : judgments) {
        if (j.turn != turn) continue;
        if (!out.emplace(pair_key(j), j.winner).second) {
            throw ValidationError("duplicate judgment for question '" + j.question_id +
                                  "' pair (" + j.model_a + ", " + j.model_b + ")");
        }
    }
    return out;
}

double mean(double sum, std::size_t n) {
    return sum / static_cast<double>(n);
}

}  // namespace

std::string_view to_string(Turn t) {
    return t == Turn::first ? "first" : "second";
}

std::string_view to_string(Winner w) {
    switch (w) {
        case Winner::a: return "a";
        case Winner::b: return "b";
        case Winner::tie: return "tie";
    }
    return "tie";
}

std::string_view to_string(Setup s) {
    return s == Setup::s1 ? "S1" : "S2";
}

Turn turn_from_string(std::string_view s) {
    if (s == "first") return Turn::first;
    if (s == "second") return Turn::second;
    throw ValidationError("field 'turn' has unknown value '" + std::string(s) + "'");
}

Winner winner_from_string(std::string_view s) {
    if (s == "a") return Winner::a;
    if (s == "b") return Winner::b;
    if (s == "tie") return Winner::tie;
    throw ValidationError("field 'winner' has unknown value '" + std::string(s) + "'");
}

Setup setup_from_string(std::string_view s) {
    if (s == "S1" || s == "s1") return Setup::s1;
    if (s == "S2" || s == "s2") return Setup::s2;
    throw ValidationError("unknown setup '" + std::string(s) + "'");
}

std::vector<PairwiseJudgment> to_pairwise(std::span<const SingleGrade> grades,
                                          const std::string& judge) {
    std::vector<const SingleGrade*> ordered;
    ordered.reserve(grades.size());
    std::set<std::string> models;
    for (const auto& grade : grades) {
        if (!grades.empty() && (grade.question_id != grades.front().question_id ||
                                grade.turn != grades.front().turn)) {
            throw ValidationError("to_pairwise takes grades of a single question and turn");
        }
        if (!models.insert(grade.model).second) {
            throw ValidationError("duplicate grade for model '" + grade.model + "'");
        }
        ordered.push_back(&grade);
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const SingleGrade* x, const SingleGrade* y) { return x->model < y->model; });

    std::vector<PairwiseJudgment> out;
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        for (std::size_t j = i + 1; j < ordered.size(); ++j) {
            PairwiseJudgment judgment;
            judgment.question_id = ordered[i]->question_id;
            judgment.turn = ordered[i]->turn;
            judgment.model_a = ordered[i]->model;
            judgment.model_b = ordered[j]->model;
            if (ordered[i]->score > ordered[j]->score) {
                judgment.winner = Winner::a;
            } else if (ordered[i]->score < ordered[j]->score) {
                judgment.winner = Winner::b;
            } else {
                judgment.winner = Winner::tie;
            }
            judgment.judge = judge;
            out.push_back(std::move(judgment));
        }
    }
    return out;
}

AgreementReport agreement(std::span<const PairwiseJudgment> a,
                          std::span<const PairwiseJudgment> b, Setup setup, Turn turn) {
    const auto map_a = keyed_winners(a, turn);
    const auto map_b = keyed_winners(b, turn);

    AgreementReport report;
    report.setup = setup;
    report.turn = turn;
    for (const auto& [key, winner_a] : map_a) {
        const auto it = map_b.find(key);
        if (it == map_b.end()) continue;
        const Winner winner_b = it->second;
        if (setup == Setup::s2 && (winner_a == Winner::tie || winner_b == Winner::tie)) {
            continue;
        }
        ++report.compared_count;
        if (winner_a == winner_b) {
            ++report.agreed_count;
        }
    }
    if (report.compared_count > 0) {
        report.pct = 100.0 * static_cast<double>(report.agreed_count) /
                     static_cast<double>(report.compared_count);
    }
    return report;
}

std::vector<PairwiseJudgment> majority_vote(std::span<const PairwiseJudgment> judgments,
                                            const std::string& judge_label) {
    struct Votes {
        PairwiseJudgment prototype;
        std::size_t a = 0, b = 0, tie = 0;
    };
    std::map<std::pair<std::string, Turn>, Votes> groups;
    for (const auto& j : judgments) {
        auto& votes = groups[{pair_key(j), j.turn}];
        votes.prototype = j;
        switch (j.winner) {
            case Winner::a: ++votes.a; break;
            case Winner::b: ++votes.b; break;
            case Winner::tie: ++votes.tie; break;
        }
    }
    std::vector<PairwiseJudgment> out;
    out.reserve(groups.size());
    for (auto& [key, votes] : groups) {
        PairwiseJudgment j = votes.prototype;
        j.judge = judge_label;
        // Strict plurality wins; any tie for the top becomes a tie vote.
        if (votes.a > votes.b && votes.a > votes.tie) {
            j.winner = Winner::a;
        } else if (votes.b > votes.a && votes.b > votes.tie) {
            j.winner = Winner::b;
        } else if (votes.tie > votes.a && votes.tie > votes.b) {
            j.winner = Winner::tie;
        } else {
            j.winner = Winner::tie;
        }
        out.push_back(std::move(j));
    }
    return out;
}

MtBenchReport mtbench_aggregate(std::span<const SingleGrade> grades,
                                const std::map<std::string, std::string>& categories) {
    struct Sums {
        double total = 0.0;
        std::size_t count = 0;
        std::array<double, 2> turn_total{0.0, 0.0};
        std::array<std::size_t, 2> turn_count{0, 0};
        std::map<std::string, std::array<double, 2>> cat_total;
        std::map<std::string, std::array<std::size_t, 2>> cat_count;
    };
    std::map<std::string, Sums> by_model;

    for (const auto& grade : grades) {
        const auto cat_it = categories.find(grade.question_id);
        if (cat_it == categories.end()) {
            throw ValidationError("question '" + grade.question_id +
                                  "' is not mapped to a category");
        }
        auto& sums = by_model[grade.model];
        const std::size_t t = grade.turn == Turn::first ? 0 : 1;
        sums.total += grade.score;
        ++sums.count;
        sums.turn_total[t] += grade.score;
        ++sums.turn_count[t];
        sums.cat_total[cat_it->second][t] += grade.score;
        ++sums.cat_count[cat_it->second][t];
    }

    MtBenchReport report;
    for (const auto& [model, sums] : by_model) {
        ModelAggregate agg;
        agg.grade_count = sums.count;
        agg.average = mean(sums.total, sums.count);
        double turn_mean_sum = 0.0;
        std::size_t turn_mean_n = 0;
        for (std::size_t t = 0; t < 2; ++t) {
            if (sums.turn_count[t] > 0) {
                const double m = mean(sums.turn_total[t], sums.turn_count[t]);
                (t == 0 ? agg.first_turn : agg.second_turn) = m;
                turn_mean_sum += m;
                ++turn_mean_n;
            }
        }
        agg.average_of_turn_means = turn_mean_n > 0 ? turn_mean_sum / turn_mean_n : 0.0;
        for (const auto& [cat, totals] : sums.cat_total) {
            const auto& counts = sums.cat_count.at(cat);
            double cat_sum = 0.0;
            std::size_t cat_n = 0;
            for (std::size_t t = 0; t < 2; ++t) {
                if (counts[t] > 0) {
                    agg.per_category_turn[cat][t] = mean(totals[t], counts[t]);
                    cat_sum += totals[t];
                    cat_n += counts[t];
                }
            }
            agg.per_category[cat] = mean(cat_sum, cat_n);
        }
        report.models[model] = std::move(agg);
    }
    return report;
}

std::string render_average_table(const MtBenchReport& report) {
    constexpr std::size_t kModelWidth = 28;
    constexpr std::size_t kColWidth = 13;
    std::ostringstream out;
    out << pad_right("Model", kModelWidth) << pad_left("First Turn", kColWidth)
        << pad_left("Second Turn", kColWidth) << pad_left("Average", kColWidth) << '\n';
    for (const auto& [model, agg] : report.models) {
        const auto cell = [&](const std::optional<double>& v) {
            return pad_left(v ? format_fixed(*v, 2) : std::string("-"), kColWidth);
        };
        out << pad_right(model, kModelWidth) << cell(agg.first_turn) << cell(agg.second_turn)
            << pad_left(format_fixed(agg.average, 2), kColWidth) << '\n';
    }
    return out.str();
}

std::string render_agreement_table(std::span<const AgreementCell> cells, Turn turn) {
    constexpr std::size_t kLabelWidth = 24;
    constexpr std::size_t kColWidth = 12;
    std::ostringstream out;
    out << "Turn: " << to_string(turn) << '\n';
    out << pad_right("Judge", kLabelWidth) << pad_left("S1", kColWidth)
        << pad_left("S2", kColWidth) << '\n';
    for (const auto& cell : cells) {
        const auto pct_text = [](const AgreementReport& r) {
            if (!r.pct) return std::string("n/a");
            return std::to_string(static_cast<long>(std::llround(*r.pct))) + "%";
        };
        out << pad_right(cell.label, kLabelWidth) << pad_left(pct_text(cell.s1), kColWidth)
            << pad_left(pct_text(cell.s2), kColWidth) << '\n';
        out << pad_right("", kLabelWidth)
            << pad_left(std::to_string(cell.s1.agreed_count), kColWidth)
            << pad_left(std::to_string(cell.s2.agreed_count), kColWidth) << '\n';
    }
    return out.str();
}

std::string radar_csv(const MtBenchReport& report) {
    std::ostringstream out;
    out << "category,model,score\n";
    std::set<std::string> categories;
    for (const auto& [model, agg] : report.models) {
        for (const auto& [cat, score] : agg.per_category) {
            categories.insert(cat);
        }
    }
    for (const auto& cat : categories) {
        for (const auto& [model, agg] : report.models) {
            const auto it = agg.per_category.find(cat);
            if (it != agg.per_category.end()) {
                out << cat << ',' << model << ',' << format_fixed(it->second, 4) << '\n';
            }
        }
    }
    return out.str();
}

nlohmann::ordered_json report_to_json(const MtBenchReport& report) {
    ordered_json models = ordered_json::object();
    for (const auto& [model, agg] : report.models) {
        ordered_json mj;
        mj["first_turn"] = agg.first_turn ? ordered_json(*agg.first_turn) : ordered_json(nullptr);
        mj["second_turn"] =
            agg.second_turn ? ordered_json(*agg.second_turn) : ordered_json(nullptr);
        mj["average"] = agg.average;
        mj["average_of_turn_means"] = agg.average_of_turn_means;
        mj["grade_count"] = agg.grade_count;
        ordered_json cats = ordered_json::object();
        for (const auto& [cat, turns] : agg.per_category_turn) {
            ordered_json cj;
            cj["first"] = turns[0] ? ordered_json(*turns[0]) : ordered_json(nullptr);
            cj["second"] = turns[1] ? ordered_json(*turns[1]) : ordered_json(nullptr);
            cj["overall"] = agg.per_category.at(cat);
            cats[cat] = std::move(cj);
        }
        mj["per_category"] = std::move(cats);
        models[model] = std::move(mj);
    }
    ordered_json j;
    j["models"] = std::move(models);
    return j;
}

nlohmann::ordered_json agreement_to_json(const AgreementReport& report) {
    ordered_json j;
    j["setup"] = to_string(report.setup);
    j["turn"] = to_string(report.turn);
    j["pct"] = report.pct ? ordered_json(*report.pct) : ordered_json(nullptr);
    j["agreed_count"] = report.agreed_count;
    j["compared_count"] = report.compared_count;
    return j;
}

SingleGrade grade_from_json(const nlohmann::ordered_json& j) {
    SingleGrade grade;
    grade.question_id = j.at("question_id").get<std::string>();
    grade.turn = turn_from_string(j.at("turn").get<std::string>());
    grade.model = j.at("model").get<std::string>();
    if (!j.at("score").is_number()) {
        throw ValidationError("field 'score' must be a number");
    }
    grade.score = j.at("score").get<double>();
    if (grade.score < 1.0 || grade.score > 10.0) {
        throw ValidationError("field 'score' must be in [1,10]");
    }
    if (auto it = j.find("reference"); it != j.end() && it->is_string()) {
        grade.reference = it->get<std::string>();
    }
    return grade;
}

PairwiseJudgment judgment_from_json(const nlohmann::ordered_json& j) {
    PairwiseJudgment judgment;
    judgment.question_id = j.at("question_id").get<std::string>();
    judgment.turn = turn_from_string(j.at("turn").get<std::string>());
    judgment.model_a = j.at("model_a").get<std::string>();
    judgment.model_b = j.at("model_b").get<std::string>();
    judgment.winner = winner_from_string(j.at("winner").get<std::string>());
    judgment.judge = j.value("judge", "");
    if (judgment.model_a == judgment.model_b) {
        throw ValidationError("fields 'model_a' and 'model_b' must differ");
    }
    if (judgment.model_b < judgment.model_a) {
        std::swap(judgment.model_a, judgment.model_b);
        if (judgment.winner == Winner::a) {
            judgment.winner = Winner::b;
        } else if (judgment.winner == Winner::b) {
            judgment.winner = Winner::a;
        }
    }
    return judgment;
}

nlohmann::ordered_json judgment_to_json(const PairwiseJudgment& judgment) {
    ordered_json j;
    j["question_id"] = judgment.question_id;
    j["turn"] = to_string(judgment.turn);
    j["model_a"] = judgment.model_a;
    j["model_b"] = judgment.model_b;
    j["winner"] = to_string(judgment.winner);
    j["judge"] = judgment.judge;
    return j;
}

std::vector<SingleGrade> load_grades(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ArgumentError("cannot open grade file: " + path.string());
    }
    std::vector<SingleGrade> grades;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            grades.push_back(grade_from_json(ordered_json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return grades;
}

std::vector<PairwiseJudgment> load_judgments(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ArgumentError("cannot open judgment file: " + path.string());
    }
    std::vector<PairwiseJudgment> judgments;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            judgments.push_back(judgment_from_json(ordered_json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return judgments;
}

void write_judgments(const std::filesystem::path& path,
                     std::span<const PairwiseJudgment> judgments) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ArgumentError("cannot open output file: " + path.string());
    }
    for (const auto& judgment : judgments) {
        out << judgment_to_json(judgment).dump() << '\n';
    }
}

}  // namespace forge::judging
