/// @file config.cpp
/// @brief Config file loading and run assembly.

#include "jury/config.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include <nlohmann/json.hpp>

#include "jury/errors.hpp"

namespace jury {

using nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::filesystem::path& path) {
    if (path.empty() || path.is_absolute()) return path;
    return base / path;
}

}  // namespace

AppConfig load_app_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("MissingFile", "cannot open config: " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Error("SchemaError", path.string() + ": invalid JSON: " + e.what());
    }
    const std::filesystem::path base = path.parent_path();

    AppConfig config;
    if (!j.contains("task")) throw config_error("config needs a 'task'");
    if (j.at("task").is_string())
        config.task = builtin_task(j.at("task").get<std::string>());
    else
        config.task = validate_task_spec(task_spec_from_json(j.at("task")));

    if (!j.contains("dataset")) throw config_error("config needs a 'dataset'");
    config.dataset = dataset_descriptor_from_json(j.at("dataset"));
    config.dataset.path = resolve(base, config.dataset.path);

    if (!j.contains("run")) throw config_error("config needs a 'run' section");
    config.run = run_config_from_json(j.at("run"));

    if (j.contains("templates_dir"))
        config.templates_dir = resolve(base, j.at("templates_dir").get<std::string>());

    const json backend = j.value("backend", json::object());
    if (backend.contains("scripted_responses"))
        config.scripted_responses =
            resolve(base, backend.at("scripted_responses").get<std::string>());
    if (backend.contains("endpoint")) {
        RemoteOptions remote;
        remote.endpoint = backend.at("endpoint").get<std::string>();
        remote.path = backend.value("path", remote.path);
        remote.api_key_env = backend.value("api_key_env", std::string{});
        remote.max_retries = backend.value("max_retries", remote.max_retries);
        if (backend.contains("timeout_s"))
            remote.timeout = std::chrono::seconds(backend.at("timeout_s").get<long>());
        if (backend.contains("initial_backoff_ms"))
            remote.initial_backoff =
                std::chrono::milliseconds(backend.at("initial_backoff_ms").get<long>());
        config.remote = std::move(remote);
    }
    if (backend.contains("rate_limit")) {
        const json& limit = backend.at("rate_limit");
        config.rate_limit = {limit.at("rate").get<double>(),
                             limit.value("capacity", limit.at("rate").get<double>())};
    }

    // Every evaluator must have a leg to run on.
    for (const EvaluatorSpec& evaluator : config.run.evaluators) {
        if (evaluator.backend == BackendKind::Scripted && config.scripted_responses.empty())
            throw config_error("evaluator '" + evaluator.id +
                               "' is scripted but backend.scripted_responses is not set");
        if (evaluator.backend == BackendKind::RemoteChat && !config.remote)
            throw config_error("evaluator '" + evaluator.id +
                               "' is remote but backend.endpoint is not set");
    }

    config.cache_path = resolve(base, j.value("cache_path", std::string("cache.jsonl")));
    if (j.contains("run_dir")) config.run_dir = resolve(base, j.at("run_dir").get<std::string>());
    config.run_id = j.value("run_id", config.task.id + "-" + config.run.mode);
    return config;
}

TemplateRegistry build_registry(const AppConfig& config) {
    TemplateRegistry registry = builtin_templates();
    if (!config.templates_dir.empty()) registry.load_directory(config.templates_dir.string());
    return registry;
}

std::unique_ptr<Invoker> build_invoker(const AppConfig& config) {
    std::shared_ptr<Backend> scripted;
    if (!config.scripted_responses.empty())
        scripted = std::make_shared<ScriptedBackend>(
            ScriptedBackend::from_jsonl(config.scripted_responses));
    std::shared_ptr<Backend> remote;
    if (config.remote) remote = std::make_shared<RemoteChatBackend>(*config.remote);

    auto router = std::make_shared<RouterBackend>(std::move(scripted), std::move(remote));
    auto cache = std::make_shared<ResponseCache>(config.cache_path);
    std::shared_ptr<TokenBucket> bucket;
    if (config.rate_limit)
        bucket = std::make_shared<TokenBucket>(config.rate_limit->first,
                                               config.rate_limit->second);
    return std::make_unique<Invoker>(std::move(router), std::move(cache), std::move(bucket));
}

std::filesystem::path resolve_run_dir(const AppConfig& config,
                                      const std::filesystem::path& config_path) {
    if (!config.run_dir.empty()) return config.run_dir;
    const auto now = std::chrono::system_clock::now();
    const std::time_t stamp = std::chrono::system_clock::to_time_t(now);
    std::tm utc{};
    gmtime_r(&stamp, &utc);
    char suffix[32];
    std::strftime(suffix, sizeof(suffix), "%Y%m%d-%H%M%S", &utc);
    return config_path.parent_path() / "runs" / (config.run_id + "-" + suffix);
}

json app_config_echo(const AppConfig& config) {
    return json{{"task", task_spec_to_json(config.task)},
                {"dataset", dataset_descriptor_to_json(config.dataset)},
                {"run", run_config_to_json(config.run)},
                {"run_id", config.run_id}};
}

}  // namespace jury
