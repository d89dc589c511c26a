/// @file orchestrator.cpp
/// @brief Run execution, planning, and run-directory persistence.

#include "jury/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "jury/errors.hpp"

namespace jury {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config validation and serialization
// ---------------------------------------------------------------------------

RunConfig validate_run_config(RunConfig config) {
    if (config.mode != "independent" && config.mode != "conversational" &&
        config.mode != "role-chain")
        throw config_error("mode must be independent, conversational or role-chain, got '" +
                           config.mode + "'");
    if (config.evaluators.empty()) throw config_error("at least one evaluator is required");
    std::set<std::string> ids;
    for (const EvaluatorSpec& e : config.evaluators) {
        if (e.id.empty()) throw config_error("evaluator id must be non-empty");
        if (!ids.insert(e.id).second) throw config_error("duplicate evaluator id '" + e.id + "'");
    }
    if (config.parallelism < 1) throw config_error("parallelism must be positive");
    if (!(config.quorum_fraction > 0.0) || config.quorum_fraction > 1.0)
        throw config_error("quorum_fraction must lie in (0, 1]");

    if (config.mode == "independent") {
        if (!config.roles.empty()) throw config_error("independent mode takes no roles");
        if (!config.order.empty()) throw config_error("independent mode takes no order");
        if (config.calls_per_sample != 0 &&
            config.calls_per_sample != static_cast<int>(config.evaluators.size()))
            throw config_error("independent mode invokes each evaluator exactly once");
        config.calls_per_sample = static_cast<int>(config.evaluators.size());
    } else if (config.mode == "conversational") {
        if (config.evaluators.size() < 2)
            throw config_error("conversational mode requires at least 2 evaluators");
        if (!config.roles.empty()) throw config_error("conversational mode takes no roles");
        if (config.order.empty())
            for (const EvaluatorSpec& e : config.evaluators) config.order.push_back(e.id);
        for (const std::string& id : config.order)
            if (!ids.count(id)) throw config_error("order references unknown evaluator '" + id + "'");
        if (config.calls_per_sample == 0)
            config.calls_per_sample = static_cast<int>(config.order.size());
        if (config.calls_per_sample < 1) throw config_error("calls_per_sample must be positive");
    } else {  // role-chain
        if (config.evaluators.size() != 1)
            throw config_error("role-chain mode requires exactly 1 evaluator");
        if (config.roles.empty()) throw config_error("role-chain mode requires at least 1 role");
        if (!config.order.empty()) throw config_error("role-chain mode takes no order");
        if (config.calls_per_sample == 0)
            config.calls_per_sample = static_cast<int>(config.roles.size());
        if (config.calls_per_sample < 1) throw config_error("calls_per_sample must be positive");
    }
    return config;
}

RunConfig run_config_from_json(const json& j) {
    RunConfig config;
    config.mode = j.value("mode", std::string("independent"));
    if (!j.contains("evaluators") || !j.at("evaluators").is_array())
        throw config_error("config needs an 'evaluators' array");
    for (const json& e : j.at("evaluators"))
        config.evaluators.push_back(evaluator_spec_from_json(e));
    if (j.contains("roles")) config.roles = j.at("roles").get<std::vector<std::string>>();
    if (j.contains("order")) config.order = j.at("order").get<std::vector<std::string>>();
    config.parallelism = j.value("parallelism", 1);
    config.quorum_fraction = j.value("quorum_fraction", 0.5);
    config.calls_per_sample = j.value("calls_per_sample", 0);
    return validate_run_config(std::move(config));
}

json run_config_to_json(const RunConfig& config) {
    json evaluators = json::array();
    for (const EvaluatorSpec& e : config.evaluators)
        evaluators.push_back(evaluator_spec_to_json(e));
    return json{{"mode", config.mode},
                {"evaluators", std::move(evaluators)},
                {"roles", config.roles},
                {"order", config.order},
                {"parallelism", config.parallelism},
                {"quorum_fraction", config.quorum_fraction},
                {"calls_per_sample", config.calls_per_sample}};
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

namespace {

void parallel_for(size_t count, int parallelism, const std::function<void(size_t)>& body) {
    const size_t workers =
        std::min<size_t>(std::max(parallelism, 1), count == 0 ? 1 : count);
    if (workers <= 1) {
        for (size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const size_t i = next.fetch_add(1);
                if (i >= count) return;
                body(i);
            }
        });
    }
    for (std::thread& t : pool) t.join();
}

struct CallOutcome {
    std::optional<Transcript> transcript;
    std::optional<Verdict> verdict;
    std::optional<Failure> failure;
};

/// Collects per-slot outcomes into a RunResult in deterministic order.
RunResult collect(std::vector<CallOutcome>&& slots) {
    RunResult result;
    for (CallOutcome& slot : slots) {
        if (slot.transcript) {
            if (!slot.transcript->cache_hit) ++result.total_queries;
            result.transcripts.push_back(std::move(*slot.transcript));
        }
        if (slot.verdict) result.verdicts.push_back(std::move(*slot.verdict));
        if (slot.failure) result.failures.push_back(std::move(*slot.failure));
    }
    std::sort(result.transcripts.begin(), result.transcripts.end(),
              [](const Transcript& a, const Transcript& b) {
                  return a.call_index < b.call_index;
              });
    std::sort(result.verdicts.begin(), result.verdicts.end(),
              [](const Verdict& a, const Verdict& b) {
                  return std::tie(a.sample_id, a.evaluator_id, a.turn) <
                         std::tie(b.sample_id, b.evaluator_id, b.turn);
              });
    return result;
}

}  // namespace

RunResult run_independent(const TaskSpec& task, const std::vector<Sample>& samples,
                          const RunConfig& config, Invoker& invoker,
                          const TemplateRegistry& registry) {
    if (config.mode != "independent")
        throw config_error("run_independent called with mode '" + config.mode + "'");
    const size_t n_eval = config.evaluators.size();
    std::vector<CallOutcome> slots(samples.size() * n_eval);

    parallel_for(slots.size(), config.parallelism, [&](size_t i) {
        const Sample& sample = samples[i / n_eval];
        const EvaluatorSpec& evaluator = config.evaluators[i % n_eval];
        CallOutcome& slot = slots[i];
        try {
            const RenderedPrompt prompt = render(task, sample, evaluator.id, registry);
            CallContext context{sample.id, evaluator.id, 0, static_cast<long long>(i)};
            slot.transcript = invoker.invoke(context, evaluator, prompt);
            slot.verdict =
                parse_verdict(task, sample.id, evaluator.id, slot.transcript->raw_response);
        } catch (const std::exception& e) {
            slot.failure = Failure{sample.id, evaluator.id, e.what()};
        }
    });
    return collect(std::move(slots));
}

namespace {

RunResult run_chained(const TaskSpec& task, const std::vector<Sample>& samples,
                      const RunConfig& config, Invoker& invoker,
                      const TemplateRegistry& registry, bool role_chain) {
    const int calls = config.calls_per_sample;
    std::vector<CallOutcome> slots(samples.size() * static_cast<size_t>(calls));

    std::map<std::string, const EvaluatorSpec*> by_id;
    for (const EvaluatorSpec& e : config.evaluators) by_id[e.id] = &e;

    parallel_for(samples.size(), config.parallelism, [&](size_t s) {
        const Sample& sample = samples[s];
        std::vector<PriorVerdict> prior;
        for (int t = 0; t < calls; ++t) {
            CallOutcome& slot = slots[s * static_cast<size_t>(calls) + static_cast<size_t>(t)];
            const EvaluatorSpec& evaluator =
                role_chain ? config.evaluators.front()
                           : *by_id.at(config.order[static_cast<size_t>(t) % config.order.size()]);
            const std::string role =
                role_chain ? config.roles[static_cast<size_t>(t) % config.roles.size()]
                           : std::string{};
            try {
                RenderedPrompt prompt = render(task, sample, evaluator.id, registry);
                if (role_chain) prompt = apply_persona(prompt, role, registry);
                if (!prior.empty()) prompt = render_followup(prompt, prior);
                CallContext context{sample.id, evaluator.id, t,
                                    static_cast<long long>(s) * calls + t};
                slot.transcript = invoker.invoke(context, evaluator, prompt);
                Verdict verdict = parse_verdict(task, sample.id, evaluator.id,
                                                slot.transcript->raw_response);
                verdict.turn = t;
                verdict.role = role;
                prior.push_back(
                    PriorVerdict{role_chain ? role : evaluator.id, verdict_summary(verdict)});
                slot.verdict = std::move(verdict);
            } catch (const std::exception& e) {
                // The chain cannot continue once a step fails.
                slot.failure = Failure{sample.id, evaluator.id, e.what()};
                break;
            }
        }
    });
    return collect(std::move(slots));
}

}  // namespace

RunResult run_conversational(const TaskSpec& task, const std::vector<Sample>& samples,
                             const RunConfig& config, Invoker& invoker,
                             const TemplateRegistry& registry) {
    if (config.mode != "conversational")
        throw config_error("run_conversational called with mode '" + config.mode + "'");
    return run_chained(task, samples, config, invoker, registry, /*role_chain=*/false);
}

RunResult run_role_chain(const TaskSpec& task, const std::vector<Sample>& samples,
                         const RunConfig& config, Invoker& invoker,
                         const TemplateRegistry& registry) {
    if (config.mode != "role-chain")
        throw config_error("run_role_chain called with mode '" + config.mode + "'");
    return run_chained(task, samples, config, invoker, registry, /*role_chain=*/true);
}

RunResult execute_run(const TaskSpec& task, const std::vector<Sample>& samples,
                      const RunConfig& config, Invoker& invoker,
                      const TemplateRegistry& registry) {
    if (config.mode == "independent")
        return run_independent(task, samples, config, invoker, registry);
    if (config.mode == "conversational")
        return run_conversational(task, samples, config, invoker, registry);
    return run_role_chain(task, samples, config, invoker, registry);
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("MissingFile", "cannot write " + path.string());
    out << text;
}

}  // namespace

void persist_run(const std::filesystem::path& dir, const json& config_echo,
                 const RunResult& result) {
    std::filesystem::create_directories(dir);
    write_text(dir / "config.json", config_echo.dump(2) + "\n");

    std::string transcripts;
    for (const Transcript& t : result.transcripts)
        transcripts += transcript_to_json(t).dump() + "\n";
    write_text(dir / "transcripts.jsonl", transcripts);

    std::string verdicts;
    for (const Verdict& v : result.verdicts) verdicts += verdict_to_json(v).dump() + "\n";
    write_text(dir / "verdicts.jsonl", verdicts);

    json failures = json::array();
    for (const Failure& f : result.failures)
        failures.push_back(json{{"sample_id", f.sample_id},
                                {"evaluator_id", f.evaluator_id},
                                {"error", f.error}});
    const json run{{"total_queries", result.total_queries},
                   {"transcripts", result.transcripts.size()},
                   {"verdicts", result.verdicts.size()},
                   {"failures", std::move(failures)}};
    write_text(dir / "run.json", run.dump(2) + "\n");
}

namespace {

std::vector<json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("MissingFile", "cannot open " + path.string());
    std::vector<json> rows;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        try {
            rows.push_back(json::parse(line));
        } catch (const json::exception& e) {
            throw Error("SchemaError",
                        path.string() + ":" + std::to_string(line_number) + ": " + e.what());
        }
    }
    return rows;
}

}  // namespace

RunResult load_run(const std::filesystem::path& dir) {
    RunResult result;
    for (const json& row : read_jsonl(dir / "verdicts.jsonl"))
        result.verdicts.push_back(verdict_from_json(row));
    for (const json& row : read_jsonl(dir / "transcripts.jsonl"))
        result.transcripts.push_back(transcript_from_json(row));
    std::ifstream run_file(dir / "run.json");
    if (run_file) {
        json run = json::parse(run_file);
        result.total_queries = run.value("total_queries", 0LL);
        for (const json& f : run.value("failures", json::array()))
            result.failures.push_back(Failure{f.value("sample_id", std::string{}),
                                              f.value("evaluator_id", std::string{}),
                                              f.value("error", std::string{})});
    }
    return result;
}

json load_run_config_echo(const std::filesystem::path& dir) {
    std::ifstream in(dir / "config.json");
    if (!in) throw Error("MissingFile", "cannot open " + (dir / "config.json").string());
    return json::parse(in);
}

}  // namespace jury
