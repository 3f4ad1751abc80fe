#include "forge/corpus.hpp"

#include "forge/errors.hpp"
#include "forge/rng.hpp"
#include "support/helpers.hpp"

#include <doctest.h>

#include <fstream>

using namespace forge;

namespace {

corpus::InstructionRecord minimal_seed(const std::string& instruction) {
    corpus::InstructionRecord record;
    record.scheme = corpus::Scheme::seed;
    record.instruction = instruction;
    record.id = corpus::make_record_id(record.scheme, instruction);
    return record;
}

corpus::InstructionRecord random_record(Rng& rng) {
    corpus::InstructionRecord record;
    const auto pick_text = [&rng](std::string_view prefix) {
        std::string out(prefix);
        const std::size_t len = rng.below(20);
        for (std::size_t i = 0; i < len; ++i) {
            out.push_back(static_cast<char>('a' + rng.below(26)));
        }
        return out;
    };
    const std::array<corpus::Scheme, 4> schemes = {corpus::Scheme::lamini, corpus::Scheme::evol,
                                                   corpus::Scheme::orca, corpus::Scheme::seed};
    record.scheme = schemes[rng.below(4)];
    record.instruction = pick_text("inst ");
    if (rng.bernoulli(0.5)) {
        record.category = corpus::kAllCategories[rng.below(corpus::kAllCategories.size())];
    }
    if (rng.bernoulli(0.4)) record.context = pick_text("ctx ");
    if (rng.bernoulli(0.4)) record.response = pick_text("resp ");
    if (record.scheme == corpus::Scheme::orca) {
        record.submixture = corpus::kAllSubmixtures[rng.below(corpus::kAllSubmixtures.size())];
        record.system_message_id = 1 + static_cast<int>(rng.below(16));
        record.expected = pick_text("exp ");
    }
    if (record.scheme == corpus::Scheme::evol && rng.bernoulli(0.8)) {
        corpus::EvolLineage lineage;
        lineage.parent_id = pick_text("parent");
        lineage.epoch = 1 + static_cast<int>(rng.below(2));
        if (rng.bernoulli(0.5)) {
            lineage.strategy = corpus::EvolStrategy::in_depth;
            const std::array<corpus::EvolOperation, 4> ops = {
                corpus::EvolOperation::add_constraints, corpus::EvolOperation::deepening,
                corpus::EvolOperation::concretizing, corpus::EvolOperation::increase_reasoning};
            lineage.operation = ops[rng.below(4)];
        } else {
            lineage.strategy = corpus::EvolStrategy::in_breadth;
        }
        record.lineage = lineage;
    }
    if (rng.bernoulli(0.5)) {
        corpus::JudgeVerdict verdict;
        const double pick = rng.unit();
        if (pick < 0.4) {
            verdict.status = corpus::VerdictStatus::accept;
            verdict.rating = 1 + static_cast<int>(rng.below(7));
        } else if (pick < 0.8) {
            verdict.status = corpus::VerdictStatus::reject;
            verdict.rating = 1 + static_cast<int>(rng.below(7));
        } else {
            verdict.status = corpus::VerdictStatus::undecided;
        }
        if (rng.bernoulli(0.5)) verdict.reason = pick_text("because ");
        record.verdict = verdict;
    }
    record.id = corpus::make_record_id(record.scheme, record.instruction, record.context);
    return record;
}

bool records_equal(const corpus::InstructionRecord& a, const corpus::InstructionRecord& b) {
    return corpus::serialize_record(a) == corpus::serialize_record(b);
}

}  // namespace

TEST_SUITE_BEGIN("corpus");

TEST_CASE("full orca record round-trips") {
    corpus::InstructionRecord record;
    record.id = "abc123";
    record.scheme = corpus::Scheme::orca;
    record.submixture = corpus::Submixture::niv2;
    record.system_message_id = 14;
    record.instruction = "Translate the phrase.";
    record.expected = "La frase.";
    record.response = "Step by step: La frase.";

    const std::string line = corpus::serialize_record(record);
    const auto parsed = corpus::parse_record(line);
    CHECK(parsed.submixture == corpus::Submixture::niv2);
    CHECK(parsed.system_message_id == 14);
    CHECK(corpus::serialize_record(parsed) == line);
}

TEST_CASE("minimal seed record round-trips with optionals absent") {
    const auto record = minimal_seed("Name three rivers.");
    const std::string line = corpus::serialize_record(record);
    CHECK(line.find("context") == std::string::npos);
    CHECK(line.find("verdict") == std::string::npos);
    const auto parsed = corpus::parse_record(line);
    CHECK_FALSE(parsed.category.has_value());
    CHECK_FALSE(parsed.context.has_value());
    CHECK_FALSE(parsed.response.has_value());
    CHECK(records_equal(parsed, record));
}

TEST_CASE("submixture on a non-orca scheme is rejected") {
    CHECK_THROWS_WITH_AS(
        corpus::parse_record(
            R"({"id":"x","scheme":"lamini","submixture":"t0","instruction":"hi"})"),
        doctest::Contains("submixture"), ValidationError);
}

TEST_CASE("orca scheme requires submixture and system message id") {
    CHECK_THROWS_AS(corpus::parse_record(R"({"id":"x","scheme":"orca","instruction":"hi"})"),
                    ValidationError);
}

TEST_CASE("malformed syntax carries a byte offset") {
    try {
        corpus::parse_record(R"({"id": "x", )");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.byte_offset() > 0);
    }
}

TEST_CASE("rating outside [1,7] is rejected") {
    CHECK_THROWS_AS(
        corpus::parse_record(
            R"({"id":"x","scheme":"seed","instruction":"hi","verdict":{"status":"accept","rating":9}})"),
        ValidationError);
}

TEST_CASE("serialize -> parse is the identity on randomized records") {
    Rng rng(4242);
    for (int i = 0; i < 300; ++i) {
        const auto record = random_record(rng);
        const std::string line = corpus::serialize_record(record);
        const auto parsed = corpus::parse_record(line);
        CHECK(records_equal(parsed, record));
        CHECK(corpus::serialize_record(parsed) == line);
    }
}

TEST_CASE("dataset_stats partitions sum to total") {
    SUBCASE("empty input") {
        const auto stats = corpus::dataset_stats({});
        CHECK(stats.total == 0);
        CHECK(stats.per_category.empty());
    }

    SUBCASE("orca submixture counts partition the corpus") {
        std::vector<corpus::InstructionRecord> records;
        const auto add = [&records](corpus::Submixture m, std::size_t n) {
            for (std::size_t i = 0; i < n; ++i) {
                corpus::InstructionRecord r;
                r.scheme = corpus::Scheme::orca;
                r.submixture = m;
                r.system_message_id = 1;
                r.instruction = "q" + std::to_string(records.size());
                r.id = "id" + std::to_string(records.size());
                records.push_back(std::move(r));
            }
        };
        add(corpus::Submixture::t0, 579);
        add(corpus::Submixture::cot, 54);
        add(corpus::Submixture::flan2021, 210);
        add(corpus::Submixture::niv2, 4665);
        const auto stats = corpus::dataset_stats(records);
        CHECK(stats.total == 579 + 54 + 210 + 4665);
        CHECK(stats.total == records.size());
        CHECK(stats.per_submixture.at("t0") == 579);
        CHECK(stats.per_submixture.at("cot") == 54);
        CHECK(stats.per_submixture.at("flan2021") == 210);
        CHECK(stats.per_submixture.at("niv2") == 4665);
    }

    SUBCASE("strategy counts over evol lineage") {
        std::vector<corpus::InstructionRecord> records;
        const auto add = [&records](corpus::EvolStrategy s,
                                    std::optional<corpus::EvolOperation> op) {
            corpus::InstructionRecord r;
            r.scheme = corpus::Scheme::evol;
            r.instruction = "i" + std::to_string(records.size());
            r.id = "id" + std::to_string(records.size());
            corpus::EvolLineage lineage;
            lineage.parent_id = "p";
            lineage.epoch = 1;
            lineage.strategy = s;
            lineage.operation = op;
            r.lineage = lineage;
            records.push_back(std::move(r));
        };
        add(corpus::EvolStrategy::in_depth, corpus::EvolOperation::deepening);
        add(corpus::EvolStrategy::in_depth, corpus::EvolOperation::concretizing);
        add(corpus::EvolStrategy::in_breadth, std::nullopt);
        const auto stats = corpus::dataset_stats(records);
        CHECK(stats.per_strategy.at("in_depth") == 2);
        CHECK(stats.per_strategy.at("in_breadth") == 1);
        CHECK(stats.per_operation.at("deepening") == 1);
        CHECK(stats.per_operation.at("none") == 1);
    }

    SUBCASE("every partition sums to total on random corpora") {
        Rng rng(31337);
        std::vector<corpus::InstructionRecord> records;
        for (int i = 0; i < 200; ++i) records.push_back(random_record(rng));
        const auto stats = corpus::dataset_stats(records);
        const auto sum = [](const std::map<std::string, std::size_t>& counts) {
            std::size_t total = 0;
            for (const auto& [key, value] : counts) total += value;
            return total;
        };
        CHECK(sum(stats.per_category) == stats.total);
        CHECK(sum(stats.per_strategy) == stats.total);
        CHECK(sum(stats.per_operation) == stats.total);
        CHECK(sum(stats.per_submixture) == stats.total);
    }
}

TEST_CASE("dataset files enforce unique ids and keep the header") {
    testsupport::TempDir dir("corpus");
    const auto path = dir.path / "data.jsonl";

    std::vector<corpus::InstructionRecord> records = {minimal_seed("one"), minimal_seed("two")};
    corpus::FileHeader header;
    header.seed = 99;
    header.rng_algorithm = Rng::kAlgorithm;
    header.tool = "forge/test";
    corpus::write_dataset(path, records, header);

    std::optional<corpus::FileHeader> loaded_header;
    const auto loaded = corpus::load_dataset(path, &loaded_header);
    CHECK(loaded.size() == 2);
    REQUIRE(loaded_header.has_value());
    CHECK(loaded_header->seed == 99);

    records.push_back(records.front());  // duplicate id
    CHECK_THROWS_AS(corpus::write_dataset(path, records, std::nullopt), ValidationError);
}

TEST_CASE("loading a file with duplicate ids fails with the line number") {
    testsupport::TempDir dir("corpus_dup");
    const auto path = dir.path / "dup.jsonl";
    {
        std::ofstream f(path);
        f << R"({"id":"same","scheme":"seed","instruction":"one"})" << "\n";
        f << R"({"id":"same","scheme":"seed","instruction":"two"})" << "\n";
    }
    CHECK_THROWS_WITH_AS(corpus::load_dataset(path), doctest::Contains(":2"), ValidationError);
}

TEST_CASE("lineage invariants are enforced on parse") {
    // epoch above the cap
    CHECK_THROWS_AS(
        corpus::parse_record(
            R"({"id":"x","scheme":"evol","instruction":"q","lineage":{"parent_id":"p","epoch":3,"strategy":"in_breadth"}})"),
        ValidationError);
    // in_depth without an operation
    CHECK_THROWS_AS(
        corpus::parse_record(
            R"({"id":"x","scheme":"evol","instruction":"q","lineage":{"parent_id":"p","epoch":1,"strategy":"in_depth"}})"),
        ValidationError);
    // in_breadth with an operation
    CHECK_THROWS_AS(
        corpus::parse_record(
            R"({"id":"x","scheme":"evol","instruction":"q","lineage":{"parent_id":"p","epoch":1,"strategy":"in_breadth","operation":"deepening"}})"),
        ValidationError);
    // unknown field
    CHECK_THROWS_WITH_AS(
        corpus::parse_record(R"({"id":"x","scheme":"seed","instruction":"q","extra":1})"),
        doctest::Contains("extra"), ValidationError);
}

TEST_CASE("record ids are deterministic content hashes") {
    const auto a = corpus::make_record_id(corpus::Scheme::lamini, "instruction", std::nullopt);
    const auto b = corpus::make_record_id(corpus::Scheme::lamini, "instruction", std::nullopt);
    const auto c = corpus::make_record_id(corpus::Scheme::evol, "instruction", std::nullopt);
    const auto d = corpus::make_record_id(corpus::Scheme::lamini, "instruction", std::string(""));
    CHECK(a == b);
    CHECK(a != c);
    CHECK(a != d);
    CHECK(a.size() == 16);
}

TEST_SUITE_END();
