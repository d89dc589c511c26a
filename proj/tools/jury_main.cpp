/// @file jury_main.cpp
/// @brief Command-line surface: run | metrics | sweep | matrix | report.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "jury/aggregate.hpp"
#include "jury/analysis.hpp"
#include "jury/config.hpp"
#include "jury/dataset.hpp"
#include "jury/errors.hpp"
#include "jury/metrics.hpp"
#include "jury/orchestrator.hpp"

namespace {

using jury::Error;
using nlohmann::json;

void write_or_print(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error("MissingFile", "cannot write " + out_path);
    out << text;
}

/// Context shared by the post-run commands, reconstructed from the run
/// directory's echoed configuration.
struct RunContext {
    jury::TaskSpec task;
    jury::RunConfig run;
    std::vector<jury::Sample> samples;
    jury::RunResult result;
};

RunContext load_context(const std::filesystem::path& run_dir) {
    const json echo = jury::load_run_config_echo(run_dir);
    RunContext context;
    context.task = jury::validate_task_spec(jury::task_spec_from_json(echo.at("task")));
    context.run = jury::run_config_from_json(echo.at("run"));
    context.samples =
        jury::load_dataset(jury::dataset_descriptor_from_json(echo.at("dataset")));
    context.result = jury::load_run(run_dir);
    return context;
}

jury::TruthPolicy pick_policy(const std::string& flag, const jury::TaskSpec& task) {
    if (!flag.empty()) return jury::parse_truth_policy(flag);
    // Graded rubrics default to annotator means; vote tasks to majority.
    jury::TruthPolicy policy;
    policy.kind = task.kind == jury::TaskKind::Rubric ? jury::TruthPolicy::Kind::Mean
                                                      : jury::TruthPolicy::Kind::Majority;
    return policy;
}

jury::MetricsReport make_report(const RunContext& context, const jury::TruthPolicy& policy) {
    const auto aggregates = jury::aggregate_all(
        context.task, context.result.verdicts, context.run.quorum_fraction,
        static_cast<int>(context.run.evaluators.size()));
    return jury::build_report(context.task, aggregates, context.samples, policy,
                              context.result.total_queries);
}

int command_run(const std::string& config_path, const std::string& run_dir_flag,
                int parallelism_override) {
    jury::AppConfig config = jury::load_app_config(config_path);
    if (parallelism_override > 0) config.run.parallelism = parallelism_override;
    if (!run_dir_flag.empty()) config.run_dir = run_dir_flag;

    const auto samples = jury::load_dataset(config.dataset);
    const auto registry = jury::build_registry(config);
    auto invoker = jury::build_invoker(config);
    const jury::RunResult result =
        jury::execute_run(config.task, samples, config.run, *invoker, registry);

    const std::filesystem::path run_dir = jury::resolve_run_dir(config, config_path);
    jury::persist_run(run_dir, jury::app_config_echo(config), result);

    std::cout << json{{"run_dir", run_dir.string()},
                      {"total_queries", result.total_queries},
                      {"verdicts", result.verdicts.size()},
                      {"failures", result.failures.size()}}
                     .dump()
              << "\n";
    return 0;
}

int command_metrics(const std::string& run_dir, const std::string& truth,
                    const std::string& format, const std::string& out_path) {
    const RunContext context = load_context(run_dir);
    const jury::TruthPolicy policy = pick_policy(truth, context.task);
    const jury::MetricsReport report = make_report(context, policy);
    std::string text;
    if (format == "json")
        text = jury::report_to_json(report).dump(2) + "\n";
    else if (format == "csv")
        text = jury::report_to_csv(report);
    else
        text = jury::report_to_table(report);
    write_or_print(text, out_path);
    return 0;
}

int command_sweep(const std::string& run_dir, const std::string& truth,
                  const std::string& out_path) {
    const RunContext context = load_context(run_dir);
    const jury::TruthPolicy policy = pick_policy(truth, context.task);
    const auto truths = jury::truth_labels(context.task, context.samples, policy);
    const auto sweep = jury::subset_sweep(context.task, context.result.verdicts, truths);
    write_or_print(jury::sweep_to_csv(sweep), out_path);
    return 0;
}

int command_matrix(const std::string& run_dir, const std::string& measure,
                   const std::string& dimension, const std::string& out_path) {
    const RunContext context = load_context(run_dir);
    const auto matrix =
        jury::agreement_matrix(context.task, context.result.verdicts, measure, dimension);
    write_or_print(jury::matrix_to_csv(matrix), out_path);
    return 0;
}

int command_report(const std::string& run_dir, const std::string& truth,
                   const std::string& out_dir_flag) {
    const RunContext context = load_context(run_dir);
    const jury::TruthPolicy policy = pick_policy(truth, context.task);
    const jury::MetricsReport report = make_report(context, policy);

    const std::filesystem::path out_dir(out_dir_flag.empty() ? run_dir : out_dir_flag);
    std::filesystem::create_directories(out_dir);
    write_or_print(jury::report_to_json(report).dump(2) + "\n",
                   (out_dir / "report.json").string());
    write_or_print(jury::report_to_csv(report), (out_dir / "report.csv").string());
    const std::string table = jury::report_to_table(report);
    write_or_print(table, (out_dir / "report.txt").string());
    std::cout << table;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reference-free LLM-as-judge evaluation harness"};
    app.require_subcommand(1);

    std::string config_path, run_dir, truth, format = "table", out_path, out_dir;
    std::string measure = "pearson", dimension;
    int parallelism = 0;

    auto* run = app.add_subcommand("run", "Execute a configured evaluation run");
    run->add_option("--config", config_path, "Run configuration JSON file")->required();
    run->add_option("--run-dir", run_dir, "Output directory (overrides config)");
    run->add_option("--parallelism", parallelism, "Worker threads (overrides config)");

    auto* metrics = app.add_subcommand("metrics", "Score a run against human labels");
    metrics->add_option("--run-dir", run_dir, "Run directory")->required();
    metrics->add_option("--truth", truth, "annotator:<id> | majority | mean");
    metrics->add_option("--format", format, "json | csv | table")
        ->check(CLI::IsMember({"json", "csv", "table"}));
    metrics->add_option("--out", out_path, "Write to file instead of stdout");

    auto* sweep = app.add_subcommand("sweep", "Accuracy over all evaluator subsets");
    sweep->add_option("--run-dir", run_dir, "Run directory")->required();
    sweep->add_option("--truth", truth, "annotator:<id> | majority");
    sweep->add_option("--out", out_path, "Write CSV to file instead of stdout");

    auto* matrix = app.add_subcommand("matrix", "Pairwise inter-evaluator agreement");
    matrix->add_option("--run-dir", run_dir, "Run directory")->required();
    matrix->add_option("--measure", measure, "pearson | kappa")
        ->check(CLI::IsMember({"pearson", "kappa"}));
    matrix->add_option("--dimension", dimension, "Rubric dimension to compare");
    matrix->add_option("--out", out_path, "Write CSV to file instead of stdout");

    auto* report = app.add_subcommand("report", "Render report files (JSON + CSV + table)");
    report->add_option("--run-dir", run_dir, "Run directory")->required();
    report->add_option("--truth", truth, "annotator:<id> | majority | mean");
    report->add_option("--out-dir", out_dir, "Target directory (default: run dir)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return command_run(config_path, run_dir, parallelism);
        if (metrics->parsed()) return command_metrics(run_dir, truth, format, out_path);
        if (sweep->parsed()) return command_sweep(run_dir, truth, out_path);
        if (matrix->parsed()) return command_matrix(run_dir, measure, dimension, out_path);
        if (report->parsed()) return command_report(run_dir, truth, out_dir);
    } catch (const Error& e) {
        std::cerr << json{{"error", e.code()}, {"message", e.what()}}.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "InternalError"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    }
    return 0;
}
