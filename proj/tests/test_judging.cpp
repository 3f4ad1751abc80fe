#include "forge/judging.hpp"

#include "forge/errors.hpp"
#include "forge/rng.hpp"
#include "support/helpers.hpp"

#include <doctest.h>

using namespace forge;
using namespace forge::judging;

namespace {

SingleGrade grade(const std::string& qid, Turn turn, const std::string& model, double score) {
    SingleGrade g;
    g.question_id = qid;
    g.turn = turn;
    g.model = model;
    g.score = score;
    return g;
}

PairwiseJudgment judgment(const std::string& qid, Turn turn, const std::string& a,
                          const std::string& b, Winner winner, const std::string& judge) {
    PairwiseJudgment j;
    j.question_id = qid;
    j.turn = turn;
    j.model_a = a;
    j.model_b = b;
    j.winner = winner;
    j.judge = judge;
    return j;
}

}  // namespace

TEST_SUITE_BEGIN("judging");

TEST_CASE("to_pairwise emits every pair with the higher score winning") {
    const std::vector<SingleGrade> grades = {
        grade("q1", Turn::first, "A", 6), grade("q1", Turn::first, "B", 4),
        grade("q1", Turn::first, "C", 6)};
    const auto judgments = to_pairwise(grades, "judge-x");
    REQUIRE(judgments.size() == 3);  // C(3,2)

    // (A,B): A wins; (A,C): tie; (B,C): C wins
    CHECK(judgments[0].model_a == "A");
    CHECK(judgments[0].model_b == "B");
    CHECK(judgments[0].winner == Winner::a);
    CHECK(judgments[1].model_a == "A");
    CHECK(judgments[1].model_b == "C");
    CHECK(judgments[1].winner == Winner::tie);
    CHECK(judgments[2].model_a == "B");
    CHECK(judgments[2].model_b == "C");
    CHECK(judgments[2].winner == Winner::b);
}

TEST_CASE("to_pairwise edge cases") {
    CHECK(to_pairwise(std::vector<SingleGrade>{grade("q", Turn::first, "only", 5)}, "j").empty());

    const std::vector<SingleGrade> equal = {
        grade("q", Turn::first, "A", 5), grade("q", Turn::first, "B", 5),
        grade("q", Turn::first, "C", 5), grade("q", Turn::first, "D", 5)};
    const auto all_ties = to_pairwise(equal, "j");
    CHECK(all_ties.size() == 6);  // C(4,2)
    for (const auto& j : all_ties) CHECK(j.winner == Winner::tie);

    const std::vector<SingleGrade> duplicate = {
        grade("q", Turn::first, "A", 5), grade("q", Turn::first, "A", 6)};
    CHECK_THROWS_AS(to_pairwise(duplicate, "j"), ValidationError);
}

TEST_CASE("to_pairwise size is C(k,2) on random grade sets") {
    Rng rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t k = 1 + rng.below(8);
        std::vector<SingleGrade> grades;
        for (std::size_t m = 0; m < k; ++m) {
            grades.push_back(grade("q", Turn::second, "model" + std::to_string(m),
                                   1.0 + static_cast<double>(rng.below(10))));
        }
        CHECK(to_pairwise(grades, "j").size() == k * (k - 1) / 2);
    }
}

TEST_CASE("agreement reproduces the hand-counted S1/S2 example") {
    const std::vector<PairwiseJudgment> a = {
        judgment("q1", Turn::first, "A", "B", Winner::a, "j1"),
        judgment("q2", Turn::first, "A", "B", Winner::tie, "j1"),
        judgment("q3", Turn::first, "A", "B", Winner::b, "j1")};
    const std::vector<PairwiseJudgment> b = {
        judgment("q1", Turn::first, "A", "B", Winner::a, "j2"),
        judgment("q2", Turn::first, "A", "B", Winner::a, "j2"),
        judgment("q3", Turn::first, "A", "B", Winner::b, "j2")};

    const auto s1 = agreement(a, b, Setup::s1, Turn::first);
    CHECK(s1.agreed_count == 2);
    CHECK(s1.compared_count == 3);
    CHECK(*s1.pct == doctest::Approx(100.0 * 2 / 3).epsilon(1e-12));

    const auto s2 = agreement(a, b, Setup::s2, Turn::first);
    CHECK(s2.agreed_count == 2);
    CHECK(s2.compared_count == 2);
    CHECK(*s2.pct == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("agreement properties") {
    Rng rng(13);
    const auto random_judgments = [&rng](const std::string& judge) {
        std::vector<PairwiseJudgment> out;
        for (int q = 0; q < 40; ++q) {
            const std::array<Winner, 3> winners = {Winner::a, Winner::b, Winner::tie};
            out.push_back(judgment("q" + std::to_string(q), Turn::first, "m1", "m2",
                                   winners[rng.below(3)], judge));
        }
        return out;
    };
    const auto a = random_judgments("a");
    const auto b = random_judgments("b");

    SUBCASE("symmetry") {
        for (const Setup setup : {Setup::s1, Setup::s2}) {
            const auto ab = agreement(a, b, setup, Turn::first);
            const auto ba = agreement(b, a, setup, Turn::first);
            CHECK(ab.agreed_count == ba.agreed_count);
            CHECK(ab.compared_count == ba.compared_count);
        }
    }
    SUBCASE("self agreement is 100% under S1") {
        const auto self = agreement(a, a, Setup::s1, Turn::first);
        CHECK(*self.pct == 100.0);
        CHECK(self.compared_count == 40);
    }
    SUBCASE("S2 drops exactly the comparisons containing a tie vote") {
        const auto s1 = agreement(a, b, Setup::s1, Turn::first);
        const auto s2 = agreement(a, b, Setup::s2, Turn::first);
        std::size_t with_tie = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i].winner == Winner::tie || b[i].winner == Winner::tie) ++with_tie;
        }
        CHECK(s2.compared_count == s1.compared_count - with_tie);
        CHECK(s2.agreed_count <= s1.agreed_count);
    }
    SUBCASE("empty intersection is flagged") {
        const auto report = agreement(a, b, Setup::s1, Turn::second);
        CHECK(report.compared_count == 0);
        CHECK_FALSE(report.pct.has_value());
    }
}

TEST_CASE("majority vote reduction") {
    std::vector<PairwiseJudgment> humans;
    humans.push_back(judgment("q", Turn::first, "A", "B", Winner::a, "h1"));
    humans.push_back(judgment("q", Turn::first, "A", "B", Winner::a, "h2"));
    humans.push_back(judgment("q", Turn::first, "A", "B", Winner::b, "h3"));
    humans.push_back(judgment("q2", Turn::first, "A", "B", Winner::a, "h1"));
    humans.push_back(judgment("q2", Turn::first, "A", "B", Winner::b, "h2"));

    const auto reduced = majority_vote(humans, "human-majority");
    REQUIRE(reduced.size() == 2);
    CHECK(reduced[0].winner == Winner::a);    // 2 vs 1
    CHECK(reduced[1].winner == Winner::tie);  // exact tie
    CHECK(reduced[0].judge == "human-majority");
}

TEST_CASE("mtbench aggregation") {
    std::map<std::string, std::string> categories = {
        {"q1", "writing"}, {"q2", "math"}, {"q3", "writing"}};

    SUBCASE("equal turn means and per-grade mean coincide") {
        const std::vector<SingleGrade> grades = {
            grade("q1", Turn::first, "m", 5), grade("q2", Turn::first, "m", 3),
            grade("q1", Turn::second, "m", 4)};
        const auto report = mtbench_aggregate(grades, categories);
        const auto& m = report.models.at("m");
        CHECK(*m.first_turn == doctest::Approx(4.0));
        CHECK(*m.second_turn == doctest::Approx(4.0));
        CHECK(m.average == doctest::Approx(4.0));
    }
    SUBCASE("unequal turn counts: per-grade mean is canonical") {
        const std::vector<SingleGrade> grades = {
            grade("q1", Turn::first, "m", 6), grade("q2", Turn::first, "m", 6),
            grade("q1", Turn::second, "m", 2)};
        const auto report = mtbench_aggregate(grades, categories);
        const auto& m = report.models.at("m");
        CHECK(m.average == doctest::Approx(14.0 / 3.0).epsilon(1e-12));
        CHECK(m.average_of_turn_means == doctest::Approx(4.0).epsilon(1e-12));
    }
    SUBCASE("unmapped question is an error") {
        const std::vector<SingleGrade> grades = {grade("zzz", Turn::first, "m", 6)};
        CHECK_THROWS_AS(mtbench_aggregate(grades, categories), ValidationError);
    }
    SUBCASE("per-category means feed the radar data") {
        const std::vector<SingleGrade> grades = {
            grade("q1", Turn::first, "m", 8), grade("q3", Turn::first, "m", 6),
            grade("q2", Turn::first, "m", 2)};
        const auto report = mtbench_aggregate(grades, categories);
        const auto& m = report.models.at("m");
        CHECK(m.per_category.at("writing") == doctest::Approx(7.0));
        CHECK(m.per_category.at("math") == doctest::Approx(2.0));
        const auto csv = radar_csv(report);
        CHECK(csv.find("category,model,score") == 0);
        CHECK(csv.find("writing,m,7.0000") != std::string::npos);
        CHECK(csv.find("math,m,2.0000") != std::string::npos);
    }
}

TEST_CASE("average table renders model rows with two decimals") {
    std::map<std::string, std::string> categories = {{"q1", "writing"}};
    const std::vector<SingleGrade> grades = {
        grade("q1", Turn::first, "model-one", 4.785), grade("q1", Turn::second, "model-one", 3.44),
        grade("q1", Turn::first, "model-two", 1.571), grade("q1", Turn::second, "model-two", 1.33)};
    const auto table = render_average_table(mtbench_aggregate(grades, categories));

    CHECK(table.find("Model") != std::string::npos);
    CHECK(table.find("First Turn") != std::string::npos);
    CHECK(table.find("Second Turn") != std::string::npos);
    CHECK(table.find("Average") != std::string::npos);
    CHECK(table.find("4.79") != std::string::npos);  // rounded to 2 decimals
    CHECK(table.find("3.44") != std::string::npos);
    CHECK(table.find("1.57") != std::string::npos);
}

TEST_CASE("agreement table renders pct above the agreed-votes count") {
    AgreementCell cell;
    cell.label = "G4-S";
    cell.s1.setup = Setup::s1;
    cell.s1.turn = Turn::first;
    cell.s1.agreed_count = 224;
    cell.s1.compared_count = 317;
    cell.s1.pct = 100.0 * 224 / 317;  // ~71%
    cell.s2.setup = Setup::s2;
    cell.s2.turn = Turn::first;
    cell.s2.agreed_count = 189;
    cell.s2.compared_count = 197;
    cell.s2.pct = 100.0 * 189 / 197;  // ~96%

    const auto table = render_agreement_table(std::vector<AgreementCell>{cell}, Turn::first);
    const auto pct_row_end = table.find("71%");
    REQUIRE(pct_row_end != std::string::npos);
    CHECK(table.find("96%") != std::string::npos);
    const auto count_pos = table.find("224");
    REQUIRE(count_pos != std::string::npos);
    CHECK(count_pos > pct_row_end);  // count sits below the percentage
    CHECK(table.find("189") != std::string::npos);
}

TEST_CASE("judgment files round-trip and normalize pair order") {
    testsupport::TempDir dir("judging");
    const auto path = dir.path / "judgments.jsonl";

    std::vector<PairwiseJudgment> out = {
        judgment("q1", Turn::first, "A", "B", Winner::a, "j"),
    };
    write_judgments(path, out);
    const auto loaded = load_judgments(path);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].model_a == "A");
    CHECK(loaded[0].winner == Winner::a);

    // A reversed pair on disk is normalized and the winner flipped.
    {
        std::ofstream f(path);
        f << R"({"question_id":"q","turn":"first","model_a":"zeta","model_b":"alpha","winner":"a","judge":"j"})"
          << "\n";
    }
    const auto normalized = load_judgments(path);
    REQUIRE(normalized.size() == 1);
    CHECK(normalized[0].model_a == "alpha");
    CHECK(normalized[0].model_b == "zeta");
    CHECK(normalized[0].winner == Winner::b);
}

TEST_SUITE_END();
