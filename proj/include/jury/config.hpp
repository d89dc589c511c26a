/// @file config.hpp
/// @brief Top-level run configuration: one JSON file binding a task, a
///        dataset, an ensemble, and backend settings. API keys come from the
///        environment only, never from the file.

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "jury/backends.hpp"
#include "jury/dataset.hpp"
#include "jury/orchestrator.hpp"
#include "jury/prompt.hpp"
#include "jury/types.hpp"

namespace jury {

struct AppConfig {
    TaskSpec task;
    DatasetDescriptor dataset;
    RunConfig run;
    std::filesystem::path templates_dir;        ///< optional template overrides
    std::filesystem::path scripted_responses;   ///< optional replay fixture
    std::optional<RemoteOptions> remote;
    std::optional<std::pair<double, double>> rate_limit;  ///< requests/s, burst
    std::filesystem::path cache_path;
    std::filesystem::path run_dir;              ///< empty: derive per run
    std::string run_id;
};

/// Parses and validates the config file. "task" is a builtin task id or an
/// inline task object; relative paths resolve against the config file's
/// directory. Throws ConfigError / MissingFile / SchemaError.
AppConfig load_app_config(const std::filesystem::path& path);

/// Builtin templates plus any overrides from config.templates_dir.
TemplateRegistry build_registry(const AppConfig& config);

/// Router over scripted/remote legs, wired to the cache and rate limiter.
std::unique_ptr<Invoker> build_invoker(const AppConfig& config);

/// config.run_dir when set, otherwise "<parent>/runs/<run_id>-<UTC stamp>".
std::filesystem::path resolve_run_dir(const AppConfig& config,
                                      const std::filesystem::path& config_path);

/// The effective configuration (defaults applied) echoed into run dirs.
nlohmann::json app_config_echo(const AppConfig& config);

}  // namespace jury
