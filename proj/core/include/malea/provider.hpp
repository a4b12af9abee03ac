#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace malea {

struct ChatTurn {
    std::string role;  // "user" / "assistant" / free-form agent label
    std::string content;
};

struct ChatRequest {
    std::string system_prompt;
    std::vector<ChatTurn> history;
    double temperature = 0.2;
    std::string model_name;
    std::optional<std::int64_t> seed;
};

enum class FinishReason { Stop, Length, ContentFilter, Other };

std::string to_string(FinishReason reason);
FinishReason finish_reason_from_string(const std::string& name);

struct ChatResponse {
    std::string content;
    int tokens_in = 0;
    int tokens_out = 0;
    FinishReason finish_reason = FinishReason::Stop;
};

enum class ProviderErrorKind {
    Auth,
    RateLimit,
    Timeout,
    Transport,
    ContentFilter,
    ReplayMiss,
    Malformed,
};

std::string to_string(ProviderErrorKind kind);

/// RateLimit, Timeout, and Transport errors are retryable; the rest are not.
bool is_retryable(ProviderErrorKind kind);

class ProviderError : public std::runtime_error {
public:
    ProviderError(ProviderErrorKind kind, const std::string& detail)
        : std::runtime_error(to_string(kind) + ": " + detail), kind_(kind) {}

    ProviderErrorKind kind() const { return kind_; }
    bool retryable() const { return is_retryable(kind_); }

private:
    ProviderErrorKind kind_;
};

class Provider {
public:
    virtual ~Provider() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
};

/// Canonical JSON text of a request: keys sorted, no insignificant
/// whitespace. Two serializations of the same request always canonicalize
/// identically; any change to content, temperature, model, or seed changes
/// the canonical form.
std::string canonical_request(const ChatRequest& request);

/// FNV-1a 64-bit hex digest of canonical_request().
std::string request_hash(const ChatRequest& request);
std::string fnv1a64_hex(const std::string& data);

struct BackoffPolicy {
    std::chrono::milliseconds base{1000};
    double factor = 2.0;
    int max_attempts = 5;

    /// Delays slept between attempts: base, base*factor, ... (max_attempts-1
    /// entries).
    std::vector<std::chrono::milliseconds> schedule() const;
};

/// Wraps a provider with exponential-backoff retry on retryable errors.
/// The sleep function is injectable for tests.
class RetryingProvider : public Provider {
public:
    using SleepFn = std::function<void(std::chrono::milliseconds)>;

    RetryingProvider(std::shared_ptr<Provider> inner, BackoffPolicy policy = {},
                     SleepFn sleep = {});

    ChatResponse complete(const ChatRequest& request) override;

private:
    std::shared_ptr<Provider> inner_;
    BackoffPolicy policy_;
    SleepFn sleep_;
};

/// Deterministic provider that replays a queued script. Each complete()
/// pops one entry; an exhausted queue is a Malformed error. Requests are
/// logged for inspection.
class ScriptedProvider : public Provider {
public:
    void push_response(std::string content);
    void push_response(ChatResponse response);
    void push_error(ProviderErrorKind kind, std::string detail = "scripted");

    ChatResponse complete(const ChatRequest& request) override;

    const std::vector<ChatRequest>& requests() const { return requests_; }
    std::size_t calls() const { return requests_.size(); }

private:
    std::queue<std::variant<ChatResponse, ProviderError>> script_;
    std::vector<ChatRequest> requests_;
};

/// Cassette: line-delimited JSON, one record per exchange:
///   {"request_hash": ..., "request_canonical": ..., "response": {...}}
struct CassetteEntry {
    std::string request_hash;
    std::string request_canonical;
    ChatResponse response;
};

std::vector<CassetteEntry> load_cassette(const std::filesystem::path& path);

/// Replays recorded responses by canonical request hash; never touches the
/// network. Unknown request -> ReplayMiss.
class ReplayProvider : public Provider {
public:
    explicit ReplayProvider(const std::filesystem::path& cassette_path);
    explicit ReplayProvider(std::vector<CassetteEntry> entries);

    ChatResponse complete(const ChatRequest& request) override;

private:
    std::map<std::string, ChatResponse> by_hash_;
};

/// Wraps a provider and appends every successful exchange to a cassette
/// file, in request order.
class RecordingProvider : public Provider {
public:
    RecordingProvider(std::shared_ptr<Provider> inner,
                      std::filesystem::path cassette_path);

    ChatResponse complete(const ChatRequest& request) override;

private:
    std::shared_ptr<Provider> inner_;
    std::filesystem::path path_;
    std::mutex write_mutex_;
};

enum class WireDialect { Generic, Gemini };

/// Picks Gemini for generativelanguage.googleapis.com / ":generateContent"
/// endpoints, Generic (chat-completions shape) otherwise.
WireDialect dialect_for_endpoint(const std::string& endpoint);

struct HttpProviderOptions {
    std::chrono::seconds timeout{120};
    /// Minimum spacing between calls; zero disables rate limiting.
    std::chrono::milliseconds min_call_interval{0};
    /// Environment variable holding the API key.
    std::string api_key_env = "MALEA_API_KEY";
};

/// Live HTTP chat-completion client. Credentials come from the environment
/// only, never from config files.
class HttpChatProvider : public Provider {
public:
    HttpChatProvider(std::string endpoint, HttpProviderOptions options = {});

    ChatResponse complete(const ChatRequest& request) override;

private:
    void rate_limit();

    std::string endpoint_;
    HttpProviderOptions options_;
    WireDialect dialect_;
    std::mutex limiter_mutex_;
    std::chrono::steady_clock::time_point last_call_{};
};

}  // namespace malea
