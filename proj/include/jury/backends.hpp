/// @file backends.hpp
/// @brief Uniform invocation layer over judge backends: a remote
///        chat-completion client, a deterministic scripted replayer, a
///        persistent content-addressed response cache, and request-rate
///        limiting.

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "jury/prompt.hpp"
#include "jury/types.hpp"

namespace jury {

/// One judge invocation as persisted to the run transcript log.
struct Transcript {
    std::string sample_id;
    std::string evaluator_id;
    std::string prompt_hash;
    std::string raw_response;
    long long latency_ms = 0;
    bool cache_hit = false;
    long long call_index = 0;  ///< unique per run, pre-assigned at plan time
};

nlohmann::json transcript_to_json(const Transcript& transcript);
Transcript transcript_from_json(const nlohmann::json& j);

/// Identity of one call within a run, known before the backend is touched.
struct CallContext {
    std::string sample_id;
    std::string evaluator_id;
    int turn = 0;
    long long call_index = 0;
};

/// Digest over (model name, decoding params, prompt payload); stable across
/// runs and platforms.
std::string cache_key(const EvaluatorSpec& evaluator, const RenderedPrompt& prompt);

// ---------------------------------------------------------------------------
// Backends
// ---------------------------------------------------------------------------

class Backend {
public:
    virtual ~Backend() = default;
    /// Returns the backend's raw response text. Throws TransportError,
    /// RateLimited, or TimeoutError.
    virtual std::string complete(const CallContext& context, const EvaluatorSpec& evaluator,
                                 const RenderedPrompt& prompt) = 0;
    /// Deterministic backends report latency 0 so transcripts are
    /// byte-stable across repetitions.
    virtual bool deterministic() const { return false; }
};

/// Replays canned responses for tests and desk-scale reproductions. Lookup
/// order: (sample, evaluator, turn) then (sample, evaluator) then the
/// generator function; a miss throws TransportError.
class ScriptedBackend : public Backend {
public:
    using Generator = std::function<std::string(const CallContext&, const RenderedPrompt&)>;

    ScriptedBackend() = default;
    explicit ScriptedBackend(Generator generator) : generator_(std::move(generator)) {}

    /// Loads JSON Lines rows {sample_id, evaluator_id, turn?, text}.
    static ScriptedBackend from_jsonl(const std::filesystem::path& path);

    void add_response(const std::string& sample_id, const std::string& evaluator_id,
                      std::string text, std::optional<int> turn = std::nullopt);

    std::string complete(const CallContext& context, const EvaluatorSpec& evaluator,
                         const RenderedPrompt& prompt) override;
    bool deterministic() const override { return true; }

private:
    std::map<std::tuple<std::string, std::string, int>, std::string> by_turn_;
    std::map<std::pair<std::string, std::string>, std::string> by_call_;
    Generator generator_;
};

/// Routes each call to the scripted or remote backend according to the
/// evaluator's declared backend kind.
class RouterBackend : public Backend {
public:
    RouterBackend(std::shared_ptr<Backend> scripted, std::shared_ptr<Backend> remote)
        : scripted_(std::move(scripted)), remote_(std::move(remote)) {}
    std::string complete(const CallContext& context, const EvaluatorSpec& evaluator,
                         const RenderedPrompt& prompt) override;
    bool deterministic() const override;

private:
    std::shared_ptr<Backend> scripted_;
    std::shared_ptr<Backend> remote_;
};

struct RemoteOptions {
    std::string endpoint;               ///< e.g. http://host:port
    std::string path = "/v1/chat/completions";
    std::string api_key_env;            ///< env var holding the bearer token
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{200};
    std::chrono::seconds timeout{60};
};

/// Chat-completion HTTP client: messages array in, choices[0].message
/// content out. Transient failures (connection errors, 5xx, 429) retry with
/// exponential backoff; a 429 Retry-After header overrides the backoff
/// delay.
class RemoteChatBackend : public Backend {
public:
    explicit RemoteChatBackend(RemoteOptions options);
    std::string complete(const CallContext& context, const EvaluatorSpec& evaluator,
                         const RenderedPrompt& prompt) override;

    /// Request body for one call; exposed for tests.
    static nlohmann::json request_body(const EvaluatorSpec& evaluator,
                                       const RenderedPrompt& prompt);

private:
    RemoteOptions options_;
};

// ---------------------------------------------------------------------------
// Cache and rate limiting
// ---------------------------------------------------------------------------

/// Append-only JSON Lines store keyed by cache_key digest. Concurrent
/// readers, serialized writers.
class ResponseCache {
public:
    /// Opens (creating if needed) and loads the store at `path`.
    explicit ResponseCache(const std::filesystem::path& path);

    std::optional<std::string> lookup(const std::string& key) const;
    void store(const std::string& key, const std::string& text);
    size_t size() const;

private:
    std::filesystem::path path_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, std::string> entries_;
};

/// Token bucket: `rate` tokens per second up to `capacity`; acquire() blocks
/// until a token is available.
class TokenBucket {
public:
    TokenBucket(double rate, double capacity);
    void acquire();

private:
    double rate_;
    double capacity_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
    std::mutex mutex_;
};

// ---------------------------------------------------------------------------
// Invoker
// ---------------------------------------------------------------------------

/// Ties a backend to the cache and rate limiter. Checks prompt/evaluator
/// modality, consults the cache (hits cost no query), and appends misses.
class Invoker {
public:
    Invoker(std::shared_ptr<Backend> backend, std::shared_ptr<ResponseCache> cache,
            std::shared_ptr<TokenBucket> bucket = nullptr);

    Transcript invoke(const CallContext& context, const EvaluatorSpec& evaluator,
                      const RenderedPrompt& prompt);

private:
    std::shared_ptr<Backend> backend_;
    std::shared_ptr<ResponseCache> cache_;
    std::shared_ptr<TokenBucket> bucket_;
};

}  // namespace jury
