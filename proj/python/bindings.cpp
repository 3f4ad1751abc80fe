#include "forge/corpus.hpp"
#include "forge/errors.hpp"
#include "forge/extract.hpp"
#include "forge/judging.hpp"
#include "forge/prefalign.hpp"
#include "forge/prompts.hpp"
#include "forge/rng.hpp"
#include "forge/sampler.hpp"
#include "forge/simtext.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace forge;
using nlohmann::ordered_json;

namespace {

py::object json_to_py(const ordered_json& j) {
    switch (j.type()) {
        case ordered_json::value_t::null: return py::none();
        case ordered_json::value_t::boolean: return py::bool_(j.get<bool>());
        case ordered_json::value_t::number_integer: return py::int_(j.get<long long>());
        case ordered_json::value_t::number_unsigned:
            return py::int_(j.get<unsigned long long>());
        case ordered_json::value_t::number_float: return py::float_(j.get<double>());
        case ordered_json::value_t::string: return py::str(j.get<std::string>());
        case ordered_json::value_t::array: {
            py::list list;
            for (const auto& item : j) list.append(json_to_py(item));
            return list;
        }
        case ordered_json::value_t::object: {
            py::dict dict;
            for (const auto& [key, value] : j.items()) {
                dict[py::str(key)] = json_to_py(value);
            }
            return dict;
        }
        default: return py::none();
    }
}

ordered_json py_to_json(const py::handle& obj) {
    if (obj.is_none()) return nullptr;
    if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
    if (py::isinstance<py::int_>(obj)) return obj.cast<long long>();
    if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
    if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
    if (py::isinstance<py::list>(obj) || py::isinstance<py::tuple>(obj)) {
        ordered_json array = ordered_json::array();
        for (const auto& item : obj) array.push_back(py_to_json(item));
        return array;
    }
    if (py::isinstance<py::dict>(obj)) {
        ordered_json object = ordered_json::object();
        for (const auto& [key, value] : obj.cast<py::dict>()) {
            object[key.cast<std::string>()] = py_to_json(value);
        }
        return object;
    }
    throw py::type_error("unsupported value type for record conversion");
}

judging::SingleGrade grade_from_dict(const py::dict& d) {
    return judging::grade_from_json(py_to_json(d));
}

judging::PairwiseJudgment judgment_from_dict(const py::dict& d) {
    return judging::judgment_from_json(py_to_json(d));
}

py::dict judgment_to_dict(const judging::PairwiseJudgment& j) {
    return json_to_py(judging::judgment_to_json(j)).cast<py::dict>();
}

corpus::InstructionRecord record_from_obj(const py::handle& obj) {
    return corpus::record_from_json(py_to_json(obj));
}

std::vector<double> list_to_weights(const std::optional<std::vector<double>>& weights) {
    return weights.value_or(std::vector<double>{});
}

}  // namespace

PYBIND11_MODULE(_forge, m) {
    m.doc() = "Core operations of the instruction-dataset toolkit";
    m.attr("__version__") = "0.1.0";

    // similarity ------------------------------------------------------------
    py::class_<simtext::SimilarityVerdict>(m, "SimilarityVerdict")
        .def_readonly("ratio", &simtext::SimilarityVerdict::ratio)
        .def_readonly("distance", &simtext::SimilarityVerdict::distance)
        .def_readonly("duplicate", &simtext::SimilarityVerdict::duplicate)
        .def("__repr__", [](const simtext::SimilarityVerdict& v) {
            return "SimilarityVerdict(ratio=" + std::to_string(v.ratio) +
                   ", distance=" + std::to_string(v.distance) +
                   ", duplicate=" + (v.duplicate ? std::string("True") : std::string("False")) +
                   ")";
        });
    m.def("gestalt_ratio", &simtext::gestalt_ratio, py::arg("a"), py::arg("b"));
    m.def("levenshtein", &simtext::levenshtein, py::arg("a"), py::arg("b"));
    m.def("is_near_duplicate", &simtext::is_near_duplicate, py::arg("candidate"),
          py::arg("seed"), py::arg("ratio_threshold") = simtext::kDefaultRatioThreshold,
          py::arg("distance_threshold") = simtext::kDefaultDistanceThreshold);
    m.def(
        "find_nearest",
        [](const std::vector<std::string>& seeds, const std::string& candidate) {
            return simtext::find_nearest(seeds, candidate);
        },
        py::arg("seeds"), py::arg("candidate"));

    // extraction --------------------------------------------------------------
    m.def(
        "extract_examples",
        [](const std::string& completion) {
            const auto result = extract::extract_examples(completion);
            return py::make_tuple(result.examples,
                                  std::string(extract::to_string(result.anomaly)));
        },
        py::arg("completion"), "Returns (examples, anomaly).");
    m.def(
        "parse_equality",
        [](const std::string& completion) {
            return std::string(extract::to_string(extract::parse_equality(completion)));
        },
        py::arg("completion"));
    m.def(
        "parse_verdict",
        [](const std::string& completion) {
            const auto verdict = extract::parse_verdict(completion);
            py::dict d;
            d["status"] = std::string(corpus::to_string(verdict.status));
            d["rating"] = verdict.rating ? py::object(py::int_(*verdict.rating))
                                         : py::object(py::none());
            d["reason"] = verdict.reason ? py::object(py::str(*verdict.reason))
                                         : py::object(py::none());
            return d;
        },
        py::arg("completion"));

    // prompt builders ------------------------------------------------------------
    m.def(
        "lamini_generation_prompt",
        [](const std::vector<py::dict>& seeds, const std::string& category,
           const std::optional<std::vector<std::string>>& topics) {
            std::vector<corpus::InstructionRecord> records;
            for (const auto& seed : seeds) records.push_back(record_from_obj(seed));
            return prompts::lamini_generation_prompt(
                records, corpus::category_from_string(category), topics);
        },
        py::arg("seeds"), py::arg("category"), py::arg("topics") = std::nullopt,
        "seeds are record dicts (id/scheme/category/instruction[/context]).");
    m.def("lamini_response_prompt", &prompts::lamini_response_prompt, py::arg("instruction"),
          py::arg("context") = std::nullopt);
    m.def(
        "evol_prompt",
        [](const std::string& instruction, const std::string& strategy,
           const std::optional<std::string>& operation) {
            std::optional<corpus::EvolOperation> op;
            if (operation) op = corpus::operation_from_string(*operation);
            return prompts::evol_prompt(instruction, corpus::strategy_from_string(strategy), op);
        },
        py::arg("instruction"), py::arg("strategy"), py::arg("operation") = std::nullopt);
    m.def("evol_response_prompt", &prompts::evol_response_prompt, py::arg("instruction"));
    m.def("equality_prompt", &prompts::equality_prompt, py::arg("first"), py::arg("second"));
    m.def("orca_prompt", &prompts::orca_prompt, py::arg("system_msg"), py::arg("query"),
          py::arg("target"));
    m.def("finetune_prompt", &prompts::finetune_prompt, py::arg("system"),
          py::arg("instruction"));
    m.def("default_finetune_system",
          [] { return std::string(prompts::default_finetune_system()); });
    m.def(
        "orca_system_message",
        [](int id) { return std::string(prompts::orca_system_message(id)); }, py::arg("id"));
    m.def(
        "judge_prompts",
        [](const py::dict& record, bool paper_verbatim) {
            const auto r = record_from_obj(record);
            const auto bundle = prompts::judge_prompts(r.scheme, r, paper_verbatim);
            return py::make_tuple(bundle.system, bundle.body);
        },
        py::arg("record"), py::arg("paper_verbatim") = false,
        "Returns (system, body) for the record's scheme.");

    // corpus -----------------------------------------------------------------
    m.def(
        "parse_record",
        [](const std::string& line) {
            return json_to_py(corpus::record_to_json(corpus::parse_record(line)));
        },
        py::arg("line"));
    m.def(
        "serialize_record",
        [](const py::dict& record) { return corpus::serialize_record(record_from_obj(record)); },
        py::arg("record"));
    m.def(
        "make_record_id",
        [](const std::string& scheme, const std::string& instruction,
           const std::optional<std::string>& context) {
            return corpus::make_record_id(corpus::scheme_from_string(scheme), instruction,
                                          context);
        },
        py::arg("scheme"), py::arg("instruction"), py::arg("context") = std::nullopt);
    m.def(
        "dataset_stats",
        [](const std::vector<py::dict>& records) {
            std::vector<corpus::InstructionRecord> parsed;
            for (const auto& record : records) parsed.push_back(record_from_obj(record));
            return json_to_py(corpus::stats_to_json(corpus::dataset_stats(parsed)));
        },
        py::arg("records"));

    // rng / sampling --------------------------------------------------------------
    py::class_<Rng>(m, "Rng")
        .def(py::init<std::uint64_t>(), py::arg("seed"))
        .def("next_u64", &Rng::next_u64)
        .def("below", &Rng::below, py::arg("n"))
        .def("unit", &Rng::unit)
        .def("bernoulli", &Rng::bernoulli, py::arg("p"))
        .def("derive", &Rng::derive, py::arg("label"))
        .def_property_readonly_static("algorithm",
                                      [](py::object) { return std::string(Rng::kAlgorithm); });
    m.def(
        "sample_system_message",
        [](const std::string& submixture, Rng& rng) {
            return sampler::sample_system_message(corpus::submixture_from_string(submixture),
                                                  rng);
        },
        py::arg("submixture"), py::arg("rng"));
    m.def(
        "choose_evol_action",
        [](Rng& rng) {
            const auto action = sampler::choose_evol_action(rng);
            return py::make_tuple(std::string(corpus::to_string(action.strategy)),
                                  action.operation
                                      ? py::object(py::str(std::string(
                                            corpus::to_string(*action.operation))))
                                      : py::object(py::none()));
        },
        py::arg("rng"));

    // preference alignment -----------------------------------------------------------
    py::class_<prefalign::TabularPolicy>(m, "TabularPolicy")
        .def_static("uniform", &prefalign::TabularPolicy::uniform, py::arg("num_prompts"),
                    py::arg("num_responses"))
        .def_static("random", &prefalign::TabularPolicy::random, py::arg("num_prompts"),
                    py::arg("num_responses"), py::arg("rng"), py::arg("scale") = 1.0)
        .def_property_readonly("num_prompts", &prefalign::TabularPolicy::num_prompts)
        .def_property_readonly("num_responses", &prefalign::TabularPolicy::num_responses)
        .def_readwrite("logits", &prefalign::TabularPolicy::logits)
        .def("prob", &prefalign::TabularPolicy::prob, py::arg("x"), py::arg("y"))
        .def("log_prob", &prefalign::TabularPolicy::log_prob, py::arg("x"), py::arg("y"));
    py::class_<prefalign::RewardTable>(m, "RewardTable")
        .def_static("zeros", &prefalign::RewardTable::zeros, py::arg("num_prompts"),
                    py::arg("num_responses"))
        .def_static("random", &prefalign::RewardTable::random, py::arg("num_prompts"),
                    py::arg("num_responses"), py::arg("rng"), py::arg("scale") = 1.0)
        .def_readwrite("values", &prefalign::RewardTable::values)
        .def("value", &prefalign::RewardTable::operator(), py::arg("x"), py::arg("y"))
        .def("set_value",
             [](prefalign::RewardTable& table, std::size_t x, std::size_t y, double value) {
                 table.at(x, y) = value;
             });
    py::class_<prefalign::PreferenceTriple>(m, "PreferenceTriple")
        .def(py::init<std::size_t, std::size_t, std::size_t>(), py::arg("prompt"),
             py::arg("winner"), py::arg("loser"))
        .def_readonly("prompt", &prefalign::PreferenceTriple::prompt)
        .def_readonly("winner", &prefalign::PreferenceTriple::winner)
        .def_readonly("loser", &prefalign::PreferenceTriple::loser);
    py::class_<prefalign::DpoConfig>(m, "DpoConfig")
        .def(py::init<>())
        .def_readwrite("beta", &prefalign::DpoConfig::beta)
        .def_readwrite("learning_rate", &prefalign::DpoConfig::learning_rate)
        .def_readwrite("epochs", &prefalign::DpoConfig::epochs)
        .def_readwrite("prompt_max_len", &prefalign::DpoConfig::prompt_max_len)
        .def_readwrite("output_max_len", &prefalign::DpoConfig::output_max_len);

    m.def("bt_prob", &prefalign::bt_prob, py::arg("r1"), py::arg("r2"));
    m.def(
        "reward_nll",
        [](const prefalign::RewardTable& rewards,
           const std::vector<prefalign::PreferenceTriple>& data,
           const std::optional<std::vector<double>>& weights) {
            return prefalign::reward_nll(rewards, data, list_to_weights(weights));
        },
        py::arg("rewards"), py::arg("data"), py::arg("weights") = std::nullopt);
    m.def("optimal_policy", &prefalign::optimal_policy, py::arg("rewards"), py::arg("ref"),
          py::arg("beta"));
    m.def("implicit_reward", &prefalign::implicit_reward, py::arg("policy"), py::arg("ref"),
          py::arg("x"), py::arg("y"), py::arg("beta"));
    m.def("dpo_pref_prob", &prefalign::dpo_pref_prob, py::arg("policy"), py::arg("ref"),
          py::arg("triple"), py::arg("beta"));
    m.def(
        "dpo_loss_and_grad",
        [](const prefalign::TabularPolicy& policy, const prefalign::TabularPolicy& ref,
           const std::vector<prefalign::PreferenceTriple>& data, double beta,
           const std::optional<std::vector<double>>& weights) {
            const auto lg = prefalign::dpo_loss_and_grad(policy, ref, data, beta,
                                                         list_to_weights(weights));
            return py::make_tuple(lg.loss, lg.grad);
        },
        py::arg("policy"), py::arg("ref"), py::arg("data"), py::arg("beta"),
        py::arg("weights") = std::nullopt, "Returns (loss, flat_gradient).");
    m.def(
        "train_dpo",
        [](const prefalign::TabularPolicy& init, const prefalign::TabularPolicy& ref,
           const std::vector<prefalign::PreferenceTriple>& data,
           const prefalign::DpoConfig& config,
           const std::optional<std::vector<double>>& weights) {
            const auto result = prefalign::train_dpo(init, ref, data, config,
                                                     list_to_weights(weights));
            return py::make_tuple(result.policy, result.loss_trace);
        },
        py::arg("init"), py::arg("ref"), py::arg("data"), py::arg("config"),
        py::arg("weights") = std::nullopt, "Returns (policy, loss_trace).");
    m.def(
        "fit_reward",
        [](std::size_t num_prompts, std::size_t num_responses,
           const std::vector<prefalign::PreferenceTriple>& data, double learning_rate,
           int epochs, const std::optional<std::vector<double>>& weights) {
            return prefalign::fit_reward(num_prompts, num_responses, data, learning_rate,
                                         epochs, list_to_weights(weights));
        },
        py::arg("num_prompts"), py::arg("num_responses"), py::arg("data"),
        py::arg("learning_rate"), py::arg("epochs"), py::arg("weights") = std::nullopt);
    m.def("sample_preference_dataset", &prefalign::sample_preference_dataset,
          py::arg("latent"), py::arg("ref"), py::arg("n"), py::arg("rng"));

    // judging ------------------------------------------------------------------
    m.def(
        "to_pairwise",
        [](const std::vector<py::dict>& grades, const std::string& judge) {
            std::vector<judging::SingleGrade> parsed;
            for (const auto& grade : grades) parsed.push_back(grade_from_dict(grade));
            const auto judgments = judging::to_pairwise(parsed, judge);
            py::list out;
            for (const auto& judgment : judgments) out.append(judgment_to_dict(judgment));
            return out;
        },
        py::arg("grades"), py::arg("judge"));
    m.def(
        "agreement",
        [](const std::vector<py::dict>& a, const std::vector<py::dict>& b,
           const std::string& setup, const std::string& turn) {
            std::vector<judging::PairwiseJudgment> ja, jb;
            for (const auto& j : a) ja.push_back(judgment_from_dict(j));
            for (const auto& j : b) jb.push_back(judgment_from_dict(j));
            const auto report = judging::agreement(ja, jb, judging::setup_from_string(setup),
                                                   judging::turn_from_string(turn));
            return json_to_py(judging::agreement_to_json(report));
        },
        py::arg("a"), py::arg("b"), py::arg("setup"), py::arg("turn"));
    m.def(
        "majority_vote",
        [](const std::vector<py::dict>& judgments, const std::string& judge_label) {
            std::vector<judging::PairwiseJudgment> parsed;
            for (const auto& j : judgments) parsed.push_back(judgment_from_dict(j));
            py::list out;
            for (const auto& j : judging::majority_vote(parsed, judge_label)) {
                out.append(judgment_to_dict(j));
            }
            return out;
        },
        py::arg("judgments"), py::arg("judge_label"));
    m.def(
        "mtbench_aggregate",
        [](const std::vector<py::dict>& grades,
           const std::map<std::string, std::string>& categories) {
            std::vector<judging::SingleGrade> parsed;
            for (const auto& grade : grades) parsed.push_back(grade_from_dict(grade));
            return json_to_py(
                judging::report_to_json(judging::mtbench_aggregate(parsed, categories)));
        },
        py::arg("grades"), py::arg("categories"));

    // error mapping ------------------------------------------------------------
    py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "RecordParseError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);
}
