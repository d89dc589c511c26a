/// @file backends.cpp
/// @brief Backend, cache, rate-limiter, and invoker implementations.

#include "jury/backends.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "jury/digest.hpp"
#include "jury/errors.hpp"

// httplib pulls in OpenSSL-dependent code only when requested; plain HTTP
// suffices for gateway-style endpoints and the test server.
#include <httplib.h>

namespace jury {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Transcript serialization
// ---------------------------------------------------------------------------

json transcript_to_json(const Transcript& t) {
    return json{{"sample_id", t.sample_id},     {"evaluator_id", t.evaluator_id},
                {"prompt_hash", t.prompt_hash}, {"raw_response", t.raw_response},
                {"latency_ms", t.latency_ms},   {"cache_hit", t.cache_hit},
                {"call_index", t.call_index}};
}

Transcript transcript_from_json(const json& j) {
    Transcript t;
    t.sample_id = j.at("sample_id").get<std::string>();
    t.evaluator_id = j.at("evaluator_id").get<std::string>();
    t.prompt_hash = j.at("prompt_hash").get<std::string>();
    t.raw_response = j.at("raw_response").get<std::string>();
    t.latency_ms = j.at("latency_ms").get<long long>();
    t.cache_hit = j.at("cache_hit").get<bool>();
    t.call_index = j.at("call_index").get<long long>();
    return t;
}

std::string cache_key(const EvaluatorSpec& evaluator, const RenderedPrompt& prompt) {
    char decoding[96];
    std::snprintf(decoding, sizeof(decoding), "t=%.17g;m=%d;s=%lld",
                  evaluator.decoding.temperature, evaluator.decoding.max_tokens,
                  evaluator.decoding.seed ? static_cast<long long>(*evaluator.decoding.seed)
                                          : -1LL);
    std::string material = evaluator.model_name;
    material.push_back('\x1f');
    material += decoding;
    material.push_back('\x1f');
    material += prompt_payload(prompt);
    return sha256_hex(material);
}

// ---------------------------------------------------------------------------
// ScriptedBackend
// ---------------------------------------------------------------------------

ScriptedBackend ScriptedBackend::from_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("MissingFile", "cannot open scripted responses: " + path.string());
    ScriptedBackend backend;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        json row;
        try {
            row = json::parse(line);
        } catch (const json::exception& e) {
            throw Error("SchemaError",
                        path.string() + ":" + std::to_string(line_number) + ": " + e.what());
        }
        std::optional<int> turn;
        if (row.contains("turn")) turn = row.at("turn").get<int>();
        backend.add_response(row.at("sample_id").get<std::string>(),
                             row.at("evaluator_id").get<std::string>(),
                             row.at("text").get<std::string>(), turn);
    }
    return backend;
}

void ScriptedBackend::add_response(const std::string& sample_id,
                                   const std::string& evaluator_id, std::string text,
                                   std::optional<int> turn) {
    if (turn)
        by_turn_[{sample_id, evaluator_id, *turn}] = std::move(text);
    else
        by_call_[{sample_id, evaluator_id}] = std::move(text);
}

std::string ScriptedBackend::complete(const CallContext& context, const EvaluatorSpec&,
                                      const RenderedPrompt& prompt) {
    if (auto it = by_turn_.find({context.sample_id, context.evaluator_id, context.turn});
        it != by_turn_.end())
        return it->second;
    if (auto it = by_call_.find({context.sample_id, context.evaluator_id});
        it != by_call_.end())
        return it->second;
    if (generator_) return generator_(context, prompt);
    throw Error("TransportError", "no scripted response for (" + context.sample_id + ", " +
                                      context.evaluator_id + ", turn " +
                                      std::to_string(context.turn) + ")");
}

// ---------------------------------------------------------------------------
// RouterBackend
// ---------------------------------------------------------------------------

std::string RouterBackend::complete(const CallContext& context, const EvaluatorSpec& evaluator,
                                    const RenderedPrompt& prompt) {
    Backend* target =
        evaluator.backend == BackendKind::Scripted ? scripted_.get() : remote_.get();
    if (!target)
        throw config_error("no backend configured for evaluator '" + evaluator.id + "'");
    return target->complete(context, evaluator, prompt);
}

bool RouterBackend::deterministic() const {
    // Deterministic only when no live remote leg exists.
    return remote_ == nullptr && scripted_ && scripted_->deterministic();
}

// ---------------------------------------------------------------------------
// RemoteChatBackend
// ---------------------------------------------------------------------------

namespace {

std::string base64_encode(const std::string& bytes) {
    static const char* alphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    size_t i = 0;
    while (i + 2 < bytes.size()) {
        const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                           (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                           static_cast<unsigned char>(bytes[i + 2]);
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.push_back(alphabet[(v >> 6) & 63]);
        out.push_back(alphabet[v & 63]);
        i += 3;
    }
    if (i + 1 == bytes.size()) {
        const unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out += "==";
    } else if (i + 2 == bytes.size()) {
        const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                           (static_cast<unsigned char>(bytes[i + 1]) << 8);
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.push_back(alphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("MissingFile", "cannot open attachment: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

RemoteChatBackend::RemoteChatBackend(RemoteOptions options) : options_(std::move(options)) {
    if (options_.endpoint.empty()) throw config_error("remote backend needs an endpoint URL");
}

json RemoteChatBackend::request_body(const EvaluatorSpec& evaluator,
                                     const RenderedPrompt& prompt) {
    json messages = json::array();
    for (const Message& message : prompt.messages) {
        const char* role = message.role == Message::Role::System ? "system" : "user";
        if (!message.image) {
            messages.push_back(json{{"role", role}, {"content", message.text}});
            continue;
        }
        // Image parts travel as data URLs in the content-array form.
        const std::string encoded = base64_encode(read_file_bytes(message.image->path));
        messages.push_back(json{
            {"role", role},
            {"content",
             json::array(
                 {json{{"type", "text"}, {"text", message.text}},
                  json{{"type", "image_url"},
                       {"image_url",
                        json{{"url", "data:" + message.image->media_type + ";base64," +
                                         encoded}}}}})}});
    }
    json body{{"model", evaluator.model_name},
              {"messages", std::move(messages)},
              {"temperature", evaluator.decoding.temperature},
              {"max_tokens", evaluator.decoding.max_tokens}};
    if (evaluator.decoding.seed) body["seed"] = *evaluator.decoding.seed;
    return body;
}

std::string RemoteChatBackend::complete(const CallContext&, const EvaluatorSpec& evaluator,
                                        const RenderedPrompt& prompt) {
    httplib::Client client(options_.endpoint);
    client.set_connection_timeout(options_.timeout.count(), 0);
    client.set_read_timeout(options_.timeout.count(), 0);

    httplib::Headers headers;
    if (!options_.api_key_env.empty()) {
        const char* key = std::getenv(options_.api_key_env.c_str());
        if (!key)
            throw config_error("environment variable " + options_.api_key_env + " is not set");
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    const std::string body = request_body(evaluator, prompt).dump();
    std::chrono::milliseconds delay = options_.initial_backoff;
    std::string last_error;

    for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(delay);
            delay *= 2;
        }
        auto result = client.Post(options_.path, headers, body, "application/json");
        if (!result) {
            last_error = "connection error: " + httplib::to_string(result.error());
            if (result.error() == httplib::Error::ConnectionTimeout ||
                result.error() == httplib::Error::Read)
                last_error = "timeout: " + httplib::to_string(result.error());
            continue;
        }
        if (result->status == 429) {
            last_error = "rate limited (429)";
            if (result->has_header("Retry-After")) {
                const long seconds = std::strtol(
                    result->get_header_value("Retry-After").c_str(), nullptr, 10);
                if (seconds > 0) delay = std::chrono::seconds(seconds);
            }
            continue;
        }
        if (result->status >= 500) {
            last_error = "server error (" + std::to_string(result->status) + ")";
            continue;
        }
        if (result->status != 200)
            throw Error("TransportError", "HTTP " + std::to_string(result->status) + ": " +
                                              result->body);
        try {
            const json parsed = json::parse(result->body);
            return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
            throw Error("TransportError",
                        std::string("malformed completion response: ") + e.what());
        }
    }
    if (last_error.rfind("rate limited", 0) == 0) throw Error("RateLimited", last_error);
    if (last_error.rfind("timeout", 0) == 0) throw Error("TimeoutError", last_error);
    throw Error("TransportError", "retries exhausted: " + last_error);
}

// ---------------------------------------------------------------------------
// ResponseCache
// ---------------------------------------------------------------------------

ResponseCache::ResponseCache(const std::filesystem::path& path) : path_(path) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ifstream in(path_);
    if (!in) return;  // fresh cache
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            const json row = json::parse(line);
            entries_[row.at("key").get<std::string>()] = row.at("text").get<std::string>();
        } catch (const json::exception&) {
            // A torn trailing line from an interrupted run is ignored; the
            // entry will simply be refetched.
        }
    }
}

std::optional<std::string> ResponseCache::lookup(const std::string& key) const {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void ResponseCache::store(const std::string& key, const std::string& text) {
    std::unique_lock lock(mutex_);
    if (entries_.count(key)) return;  // append-only; first write wins
    entries_[key] = text;
    std::ofstream out(path_, std::ios::app);
    out << json{{"key", key}, {"text", text}}.dump() << '\n';
}

size_t ResponseCache::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

// ---------------------------------------------------------------------------
// TokenBucket
// ---------------------------------------------------------------------------

TokenBucket::TokenBucket(double rate, double capacity)
    : rate_(rate), capacity_(capacity), tokens_(capacity),
      last_(std::chrono::steady_clock::now()) {
    if (rate <= 0 || capacity <= 0)
        throw config_error("token bucket rate and capacity must be positive");
}

void TokenBucket::acquire() {
    std::unique_lock lock(mutex_);
    for (;;) {
        const auto now = std::chrono::steady_clock::now();
        const double elapsed = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        tokens_ = std::min(capacity_, tokens_ + elapsed * rate_);
        if (tokens_ >= 1.0) {
            tokens_ -= 1.0;
            return;
        }
        const double wait = (1.0 - tokens_) / rate_;
        lock.unlock();
        std::this_thread::sleep_for(std::chrono::duration<double>(wait));
        lock.lock();
    }
}

// ---------------------------------------------------------------------------
// Invoker
// ---------------------------------------------------------------------------

Invoker::Invoker(std::shared_ptr<Backend> backend, std::shared_ptr<ResponseCache> cache,
                 std::shared_ptr<TokenBucket> bucket)
    : backend_(std::move(backend)), cache_(std::move(cache)), bucket_(std::move(bucket)) {
    if (!backend_) throw config_error("invoker needs a backend");
}

Transcript Invoker::invoke(const CallContext& context, const EvaluatorSpec& evaluator,
                           const RenderedPrompt& prompt) {
    if (prompt.has_image() && !evaluator.image_modality)
        throw Error("ModalityMismatch",
                    "evaluator " + evaluator.id + " does not accept image prompts");

    Transcript transcript;
    transcript.sample_id = context.sample_id;
    transcript.evaluator_id = context.evaluator_id;
    transcript.prompt_hash = prompt.byte_hash;
    transcript.call_index = context.call_index;

    const std::string key = cache_key(evaluator, prompt);
    if (cache_) {
        if (auto cached = cache_->lookup(key)) {
            transcript.raw_response = *cached;
            transcript.cache_hit = true;
            transcript.latency_ms = 0;
            return transcript;
        }
    }

    if (bucket_) bucket_->acquire();
    const auto start = std::chrono::steady_clock::now();
    transcript.raw_response = backend_->complete(context, evaluator, prompt);
    // Scripted calls report latency 0 so transcripts stay byte-stable.
    const bool scripted =
        evaluator.backend == BackendKind::Scripted || backend_->deterministic();
    transcript.latency_ms =
        scripted ? 0
                 : std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();
    transcript.cache_hit = false;
    if (cache_) cache_->store(key, transcript.raw_response);
    return transcript;
}

}  // namespace jury
