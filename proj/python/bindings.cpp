/// @file bindings.cpp
/// @brief Python module exposing the main harness operations: verdict
///        parsing, vote aggregation, agreement metrics, subset sweeps, and
///        ground-truth derivation. Structured values cross the boundary as
///        plain dicts/lists mirroring the JSON Lines schemas.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "jury/aggregate.hpp"
#include "jury/analysis.hpp"
#include "jury/dataset.hpp"
#include "jury/errors.hpp"
#include "jury/metrics.hpp"
#include "jury/prompt.hpp"
#include "jury/types.hpp"
#include "jury/verdict.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

py::object json_to_py(const json& j) {
    switch (j.type()) {
        case json::value_t::null: return py::none();
        case json::value_t::boolean: return py::bool_(j.get<bool>());
        case json::value_t::number_integer: return py::int_(j.get<long long>());
        case json::value_t::number_unsigned: return py::int_(j.get<unsigned long long>());
        case json::value_t::number_float: return py::float_(j.get<double>());
        case json::value_t::string: return py::str(j.get<std::string>());
        case json::value_t::array: {
            py::list out;
            for (const json& item : j) out.append(json_to_py(item));
            return out;
        }
        case json::value_t::object: {
            py::dict out;
            for (const auto& [key, value] : j.items()) out[py::str(key)] = json_to_py(value);
            return out;
        }
        default: return py::none();
    }
}

json py_to_json(const py::handle& obj) {
    if (obj.is_none()) return nullptr;
    if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
    if (py::isinstance<py::int_>(obj)) return obj.cast<long long>();
    if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
    if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
    if (py::isinstance<py::list>(obj) || py::isinstance<py::tuple>(obj)) {
        json arr = json::array();
        for (const py::handle& item : obj) arr.push_back(py_to_json(item));
        return arr;
    }
    if (py::isinstance<py::dict>(obj)) {
        json out = json::object();
        for (const auto& item : obj.cast<py::dict>())
            out[item.first.cast<std::string>()] = py_to_json(item.second);
        return out;
    }
    throw std::invalid_argument("value is not representable as JSON");
}

std::vector<jury::Verdict> verdicts_from_py(const py::list& rows) {
    std::vector<jury::Verdict> verdicts;
    verdicts.reserve(rows.size());
    for (const py::handle& row : rows) verdicts.push_back(jury::verdict_from_json(py_to_json(row)));
    return verdicts;
}

jury::ConfusionMatrix matrix_from_py(const std::vector<std::string>& truth,
                                     const std::vector<std::string>& pred,
                                     const std::vector<std::string>& labels) {
    if (truth.size() != pred.size())
        throw jury::Error("LengthMismatch", "truth and prediction lists differ in length");
    std::vector<std::pair<std::string, std::string>> pairs;
    pairs.reserve(truth.size());
    for (size_t i = 0; i < truth.size(); ++i) pairs.emplace_back(truth[i], pred[i]);
    return jury::ConfusionMatrix::from_pairs(pairs, labels);
}

std::map<std::string, jury::LabelValue> truth_from_py(const py::dict& truth) {
    std::map<std::string, jury::LabelValue> out;
    for (const auto& item : truth) {
        const std::string key = item.first.cast<std::string>();
        if (py::isinstance<py::str>(item.second))
            out[key] = jury::LabelValue{item.second.cast<std::string>()};
        else
            out[key] = jury::LabelValue{item.second.cast<double>()};
    }
    return out;
}

py::object optional_to_py(const std::optional<double>& value) {
    if (!value) return py::none();
    return py::float_(*value);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Ensemble LLM-as-judge evaluation core";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const jury::Error& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    // --- tasks and prompts ---------------------------------------------------
    m.def("builtin_task_ids", &jury::builtin_task_ids,
          "Identifiers of the shipped evaluation tasks.");
    m.def(
        "builtin_task",
        [](const std::string& id) { return json_to_py(jury::task_spec_to_json(jury::builtin_task(id))); },
        py::arg("task_id"), "Shipped task specification as a dict.");
    m.def(
        "render_prompt",
        [](const std::string& task_id, const py::dict& fields, const std::string& evaluator_label) {
            jury::Sample sample;
            sample.id = "adhoc";
            for (const auto& item : fields)
                sample.fields[item.first.cast<std::string>()] = item.second.cast<std::string>();
            return jury::render(jury::builtin_task(task_id), sample, evaluator_label).joined_text();
        },
        py::arg("task_id"), py::arg("fields"), py::arg("evaluator_label") = "A",
        "Rendered prompt text for one sample under a shipped task.");

    // --- verdict parsing -----------------------------------------------------
    m.def(
        "parse_verdict",
        [](const std::string& task_id, const std::string& sample_id,
           const std::string& evaluator_id, const std::string& text) {
            const jury::Verdict v =
                jury::parse_verdict(jury::builtin_task(task_id), sample_id, evaluator_id, text);
            return json_to_py(jury::verdict_to_json(v));
        },
        py::arg("task_id"), py::arg("sample_id"), py::arg("evaluator_id"), py::arg("text"),
        "Parse free-form judge output into a structured verdict dict.");
    m.def(
        "strip_reasoning",
        [](const std::string& text) {
            const jury::StripResult r = jury::strip_reasoning(text);
            return py::make_tuple(r.text, r.diagnostics);
        },
        py::arg("text"), "Remove well-formed <think>...</think> spans; returns (text, diagnostics).");
    m.def(
        "parse_choice",
        [](const std::string& text) { return jury::to_string(jury::parse_choice(text)); },
        py::arg("text"), "Canonical choice behind the last 'Final Best Assistant' marker.");

    // --- aggregation ---------------------------------------------------------
    m.def(
        "majority_vote",
        [](const std::vector<std::string>& votes) {
            std::vector<jury::Choice> ballot;
            ballot.reserve(votes.size());
            for (const std::string& v : votes) ballot.push_back(jury::choice_from_string(v));
            return jury::to_string(jury::majority_vote(ballot));
        },
        py::arg("votes"), "Majority over choice labels with the documented tie rules.");
    m.def("binary_majority", &jury::binary_majority, py::arg("votes"),
          "Strict majority for 0/1 ballots; ties resolve to 0.");
    m.def("quorum_threshold", &jury::quorum_threshold, py::arg("quorum_fraction"),
          py::arg("ensemble_size"), "Parsed verdicts required for a sample to count.");
    m.def(
        "aggregate",
        [](const std::string& task_id, const py::list& verdicts, double quorum_fraction,
           int ensemble_size) {
            const auto combined = jury::aggregate_all(jury::builtin_task(task_id),
                                                      verdicts_from_py(verdicts), quorum_fraction,
                                                      ensemble_size);
            py::list out;
            for (const jury::AggregateVerdict& a : combined)
                out.append(json_to_py(jury::aggregate_to_json(a)));
            return out;
        },
        py::arg("task_id"), py::arg("verdicts"), py::arg("quorum_fraction") = 0.5,
        py::arg("ensemble_size") = 0, "Per-sample ensemble verdicts from a verdict list.");

    // --- classification metrics ----------------------------------------------
    const auto def_classification = [&m](const char* name, double (*fn)(const jury::ConfusionMatrix&),
                                         const char* doc) {
        m.def(
            name,
            [fn](const std::vector<std::string>& truth, const std::vector<std::string>& pred,
                 const std::vector<std::string>& labels) {
                return fn(matrix_from_py(truth, pred, labels));
            },
            py::arg("truth"), py::arg("pred"), py::arg("labels") = std::vector<std::string>{}, doc);
    };
    def_classification("accuracy", &jury::accuracy, "Fraction of matching labels.");
    def_classification("macro_f1", &jury::macro_f1, "Unweighted mean per-class F1.");
    def_classification("cohens_kappa", &jury::cohens_kappa, "Chance-corrected agreement.");
    def_classification("mcc", &jury::mcc, "Multiclass Matthews correlation coefficient.");
    m.def(
        "confusion",
        [](const std::vector<std::string>& truth, const std::vector<std::string>& pred,
           const std::vector<std::string>& labels) {
            const jury::ConfusionMatrix cm = matrix_from_py(truth, pred, labels);
            py::dict out;
            out["labels"] = cm.labels;
            out["counts"] = cm.counts;
            return out;
        },
        py::arg("truth"), py::arg("pred"), py::arg("labels") = std::vector<std::string>{},
        "Confusion matrix (rows = truth, columns = predictions).");

    // --- error and correlation metrics ---------------------------------------
    m.def(
        "error_metrics",
        [](const std::vector<double>& pred, const std::vector<double>& truth) {
            const jury::ErrorMetrics e = jury::error_metrics(pred, truth);
            py::dict out;
            out["mse"] = e.mse;
            out["rmse"] = e.rmse;
            out["mae"] = e.mae;
            return out;
        },
        py::arg("pred"), py::arg("truth"), "MSE, RMSE, and MAE between score vectors.");
    m.def("average_ranks", &jury::average_ranks, py::arg("values"),
          "1-based ranks with ties averaged.");
    m.def(
        "correlations",
        [](const std::vector<double>& pred, const std::vector<double>& truth) {
            const jury::CorrelationMetrics c = jury::correlations(pred, truth);
            py::dict out;
            out["pearson"] = optional_to_py(c.pearson);
            out["spearman"] = optional_to_py(c.spearman);
            out["kendall"] = optional_to_py(c.kendall);
            return out;
        },
        py::arg("pred"), py::arg("truth"),
        "Pearson / Spearman / Kendall tau-b; None where undefined.");

    // --- ensemble analysis ---------------------------------------------------
    m.def(
        "subset_sweep",
        [](const std::string& task_id, const py::list& verdicts, const py::dict& truth) {
            const jury::SubsetSweepResult sweep = jury::subset_sweep(
                jury::builtin_task(task_id), verdicts_from_py(verdicts), truth_from_py(truth));
            py::list rows;
            for (const jury::SubsetSweepRow& row : sweep.rows) {
                py::dict r;
                r["k"] = row.k;
                r["subset_count"] = row.subset_count;
                r["mean_accuracy"] = row.mean_accuracy;
                r["se"] = optional_to_py(row.se);
                rows.append(r);
            }
            return rows;
        },
        py::arg("task_id"), py::arg("verdicts"), py::arg("truth"),
        "Exhaustive ensemble-subset accuracy sweep; truth maps sample id to label.");

    // --- ground truth helpers ------------------------------------------------
    m.def("derive_oid_truth", &jury::derive_oid_truth, py::arg("positive_ratings"),
          py::arg("total_raters"),
          "Binary caption label: 1 iff the positive fraction exceeds 0.50.");
    m.def("annotator_majority", &jury::annotator_majority, py::arg("labels"),
          "Plurality over choice labels with the aggregation tie rule.");
}
