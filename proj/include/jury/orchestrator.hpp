/// @file orchestrator.hpp
/// @brief Run execution in three modes — independent ensemble,
///        conversational chain, role chain — with per-call accounting and
///        deterministic result ordering.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "jury/backends.hpp"
#include "jury/prompt.hpp"
#include "jury/types.hpp"
#include "jury/verdict.hpp"

namespace jury {

struct RunConfig {
    std::string mode = "independent";  ///< independent | conversational | role-chain
    std::vector<EvaluatorSpec> evaluators;
    std::vector<std::string> roles;  ///< persona template ids (role-chain only)
    std::vector<std::string> order;  ///< evaluator id sequence (conversational only)
    int parallelism = 1;
    double quorum_fraction = 0.5;
    /// Chained modes: invocations per sample. 0 means one pass over the
    /// order (conversational) or role list (role-chain); turn t uses
    /// order[t mod len] resp. roles[t mod len].
    int calls_per_sample = 0;
};

/// Normalizes defaults and enforces the mode invariants: conversational
/// needs >= 2 evaluators, role-chain exactly 1 evaluator and >= 1 role.
/// Throws ConfigError.
RunConfig validate_run_config(RunConfig config);

RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json run_config_to_json(const RunConfig& config);

struct Failure {
    std::string sample_id;
    std::string evaluator_id;
    std::string error;
};

struct RunResult {
    std::vector<Verdict> verdicts;        ///< sorted by (sample, evaluator, turn)
    std::vector<Transcript> transcripts;  ///< sorted by call_index
    long long total_queries = 0;          ///< transcripts with cache_hit = false
    std::vector<Failure> failures;        ///< invocation errors (not parse failures)
};

/// One invocation per (sample, evaluator); no evaluator ever sees another's
/// output. Concurrent up to config.parallelism; results are identical for
/// any parallelism on a deterministic backend.
RunResult run_independent(const TaskSpec& task, const std::vector<Sample>& samples,
                          const RunConfig& config, Invoker& invoker,
                          const TemplateRegistry& registry = builtin_templates());

/// Sequential chain per sample over config.order; turn t >= 1 receives the
/// prior turns' verdict summaries. A failed step fails the sample from that
/// step onward. Samples run concurrently.
RunResult run_conversational(const TaskSpec& task, const std::vector<Sample>& samples,
                             const RunConfig& config, Invoker& invoker,
                             const TemplateRegistry& registry = builtin_templates());

/// One evaluator re-invoked under successive personas; each turn sees the
/// prior roles' verdict summaries.
RunResult run_role_chain(const TaskSpec& task, const std::vector<Sample>& samples,
                         const RunConfig& config, Invoker& invoker,
                         const TemplateRegistry& registry = builtin_templates());

/// Dispatches on config.mode.
RunResult execute_run(const TaskSpec& task, const std::vector<Sample>& samples,
                      const RunConfig& config, Invoker& invoker,
                      const TemplateRegistry& registry = builtin_templates());

// ---------------------------------------------------------------------------
// Run directory persistence
// ---------------------------------------------------------------------------

/// Writes config.json (the echoed effective configuration), transcripts.jsonl,
/// verdicts.jsonl, and run.json (totals + failures) under `dir`.
void persist_run(const std::filesystem::path& dir, const nlohmann::json& config_echo,
                 const RunResult& result);

/// Reloads verdicts, transcripts, and totals from a run directory.
RunResult load_run(const std::filesystem::path& dir);

/// The effective configuration echoed into the run directory.
nlohmann::json load_run_config_echo(const std::filesystem::path& dir);

}  // namespace jury
