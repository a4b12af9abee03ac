#include "malea/provider.hpp"

#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace malea {

std::string to_string(FinishReason reason) {
    switch (reason) {
        case FinishReason::Stop: return "stop";
        case FinishReason::Length: return "length";
        case FinishReason::ContentFilter: return "content_filter";
        case FinishReason::Other: return "other";
    }
    return "other";
}

FinishReason finish_reason_from_string(const std::string& name) {
    if (name == "stop") return FinishReason::Stop;
    if (name == "length") return FinishReason::Length;
    if (name == "content_filter") return FinishReason::ContentFilter;
    return FinishReason::Other;
}

std::string to_string(ProviderErrorKind kind) {
    switch (kind) {
        case ProviderErrorKind::Auth: return "auth";
        case ProviderErrorKind::RateLimit: return "rate_limit";
        case ProviderErrorKind::Timeout: return "timeout";
        case ProviderErrorKind::Transport: return "transport";
        case ProviderErrorKind::ContentFilter: return "content_filter";
        case ProviderErrorKind::ReplayMiss: return "replay_miss";
        case ProviderErrorKind::Malformed: return "malformed";
    }
    return "?";
}

bool is_retryable(ProviderErrorKind kind) {
    switch (kind) {
        case ProviderErrorKind::RateLimit:
        case ProviderErrorKind::Timeout:
        case ProviderErrorKind::Transport:
            return true;
        default:
            return false;
    }
}

std::string canonical_request(const ChatRequest& request) {
    nlohmann::json history = nlohmann::json::array();
    for (const auto& turn : request.history)
        history.push_back({{"content", turn.content}, {"role", turn.role}});
    nlohmann::json j{
        {"history", history},
        {"model", request.model_name},
        {"system", request.system_prompt},
        {"temperature", request.temperature},
    };
    if (request.seed) j["seed"] = *request.seed;
    // nlohmann object keys are sorted; dump() with no indent is canonical.
    return j.dump();
}

std::string fnv1a64_hex(const std::string& data) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::string request_hash(const ChatRequest& request) {
    return fnv1a64_hex(canonical_request(request));
}

std::vector<std::chrono::milliseconds> BackoffPolicy::schedule() const {
    std::vector<std::chrono::milliseconds> delays;
    double delay = static_cast<double>(base.count());
    for (int i = 0; i + 1 < max_attempts; ++i) {
        delays.emplace_back(static_cast<std::int64_t>(delay));
        delay *= factor;
    }
    return delays;
}

RetryingProvider::RetryingProvider(std::shared_ptr<Provider> inner,
                                   BackoffPolicy policy, SleepFn sleep)
    : inner_(std::move(inner)),
      policy_(policy),
      sleep_(sleep ? std::move(sleep) : [](std::chrono::milliseconds d) {
          std::this_thread::sleep_for(d);
      }) {}

ChatResponse RetryingProvider::complete(const ChatRequest& request) {
    auto delays = policy_.schedule();
    for (int attempt = 0;; ++attempt) {
        try {
            return inner_->complete(request);
        } catch (const ProviderError& e) {
            if (!e.retryable() || attempt >= policy_.max_attempts - 1) throw;
            sleep_(delays[attempt]);
        }
    }
}

void ScriptedProvider::push_response(std::string content) {
    ChatResponse r;
    r.content = std::move(content);
    r.tokens_in = 1;
    r.tokens_out = 1;
    push_response(std::move(r));
}

void ScriptedProvider::push_response(ChatResponse response) {
    script_.push(std::move(response));
}

void ScriptedProvider::push_error(ProviderErrorKind kind, std::string detail) {
    script_.push(ProviderError(kind, std::move(detail)));
}

ChatResponse ScriptedProvider::complete(const ChatRequest& request) {
    requests_.push_back(request);
    if (script_.empty())
        throw ProviderError(ProviderErrorKind::Malformed, "script exhausted");
    auto next = std::move(script_.front());
    script_.pop();
    if (auto* err = std::get_if<ProviderError>(&next)) throw *err;
    return std::get<ChatResponse>(next);
}

namespace {

nlohmann::json response_to_json(const ChatResponse& response) {
    return {
        {"content", response.content},
        {"finish_reason", to_string(response.finish_reason)},
        {"tokens_in", response.tokens_in},
        {"tokens_out", response.tokens_out},
    };
}

ChatResponse response_from_json(const nlohmann::json& j) {
    ChatResponse r;
    r.content = j.at("content").get<std::string>();
    r.finish_reason = finish_reason_from_string(j.at("finish_reason").get<std::string>());
    r.tokens_in = j.at("tokens_in").get<int>();
    r.tokens_out = j.at("tokens_out").get<int>();
    return r;
}

}  // namespace

std::vector<CassetteEntry> load_cassette(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ProviderError(ProviderErrorKind::Malformed,
                            "cannot open cassette: " + path.string());
    std::vector<CassetteEntry> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
            CassetteEntry e;
            e.request_hash = j.at("request_hash").get<std::string>();
            e.request_canonical = j.at("request_canonical").get<std::string>();
            e.response = response_from_json(j.at("response"));
            entries.push_back(std::move(e));
        } catch (const nlohmann::json::exception& ex) {
            throw ProviderError(ProviderErrorKind::Malformed,
                                "cassette line " + std::to_string(lineno) + ": " +
                                    ex.what());
        }
    }
    return entries;
}

ReplayProvider::ReplayProvider(const std::filesystem::path& cassette_path)
    : ReplayProvider(load_cassette(cassette_path)) {}

ReplayProvider::ReplayProvider(std::vector<CassetteEntry> entries) {
    for (auto& e : entries) by_hash_[e.request_hash] = std::move(e.response);
}

ChatResponse ReplayProvider::complete(const ChatRequest& request) {
    auto it = by_hash_.find(request_hash(request));
    if (it == by_hash_.end())
        throw ProviderError(ProviderErrorKind::ReplayMiss,
                            "no cassette entry for request hash " +
                                request_hash(request));
    return it->second;
}

RecordingProvider::RecordingProvider(std::shared_ptr<Provider> inner,
                                     std::filesystem::path cassette_path)
    : inner_(std::move(inner)), path_(std::move(cassette_path)) {
    // Truncate so a rerun starts a fresh cassette.
    std::ofstream out(path_, std::ios::trunc);
}

ChatResponse RecordingProvider::complete(const ChatRequest& request) {
    ChatResponse response = inner_->complete(request);
    std::lock_guard lock(write_mutex_);
    std::ofstream out(path_, std::ios::app);
    nlohmann::json record{
        {"request_hash", request_hash(request)},
        {"request_canonical", canonical_request(request)},
        {"response", response_to_json(response)},
    };
    out << record.dump() << "\n";
    return response;
}

WireDialect dialect_for_endpoint(const std::string& endpoint) {
    if (endpoint.find("generativelanguage.googleapis.com") != std::string::npos ||
        endpoint.find(":generateContent") != std::string::npos)
        return WireDialect::Gemini;
    return WireDialect::Generic;
}

HttpChatProvider::HttpChatProvider(std::string endpoint, HttpProviderOptions options)
    : endpoint_(std::move(endpoint)),
      options_(std::move(options)),
      dialect_(dialect_for_endpoint(endpoint_)) {}

void HttpChatProvider::rate_limit() {
    if (options_.min_call_interval.count() == 0) return;
    std::lock_guard lock(limiter_mutex_);
    auto now = std::chrono::steady_clock::now();
    auto next_allowed = last_call_ + options_.min_call_interval;
    if (now < next_allowed) std::this_thread::sleep_for(next_allowed - now);
    last_call_ = std::chrono::steady_clock::now();
}

namespace {

struct SplitUrl {
    std::string base;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ProviderError(ProviderErrorKind::Transport, "bad endpoint URL: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

nlohmann::json generic_body(const ChatRequest& request) {
    nlohmann::json messages = nlohmann::json::array();
    if (!request.system_prompt.empty())
        messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
    for (const auto& turn : request.history)
        messages.push_back({{"role", turn.role}, {"content", turn.content}});
    nlohmann::json body{
        {"model", request.model_name},
        {"messages", messages},
        {"temperature", request.temperature},
    };
    if (request.seed) body["seed"] = *request.seed;
    return body;
}

ChatResponse parse_generic(const nlohmann::json& j) {
    ChatResponse r;
    const auto& choice = j.at("choices").at(0);
    r.content = choice.at("message").at("content").get<std::string>();
    if (choice.contains("finish_reason"))
        r.finish_reason =
            finish_reason_from_string(choice["finish_reason"].get<std::string>());
    if (j.contains("usage")) {
        r.tokens_in = j["usage"].value("prompt_tokens", 0);
        r.tokens_out = j["usage"].value("completion_tokens", 0);
    }
    return r;
}

nlohmann::json gemini_body(const ChatRequest& request) {
    nlohmann::json contents = nlohmann::json::array();
    for (const auto& turn : request.history) {
        std::string role = turn.role == "assistant" ? "model" : "user";
        contents.push_back(
            {{"role", role}, {"parts", {{{"text", turn.content}}}}});
    }
    nlohmann::json body{
        {"contents", contents},
        {"generationConfig", {{"temperature", request.temperature}}},
    };
    if (!request.system_prompt.empty())
        body["systemInstruction"] = {{"parts", {{{"text", request.system_prompt}}}}};
    if (request.seed) body["generationConfig"]["seed"] = *request.seed;
    return body;
}

ChatResponse parse_gemini(const nlohmann::json& j) {
    ChatResponse r;
    const auto& candidate = j.at("candidates").at(0);
    std::string text;
    for (const auto& part : candidate.at("content").at("parts"))
        text += part.value("text", "");
    r.content = std::move(text);
    std::string finish = candidate.value("finishReason", "STOP");
    if (finish == "STOP") r.finish_reason = FinishReason::Stop;
    else if (finish == "MAX_TOKENS") r.finish_reason = FinishReason::Length;
    else if (finish == "SAFETY") r.finish_reason = FinishReason::ContentFilter;
    else r.finish_reason = FinishReason::Other;
    if (j.contains("usageMetadata")) {
        r.tokens_in = j["usageMetadata"].value("promptTokenCount", 0);
        r.tokens_out = j["usageMetadata"].value("candidatesTokenCount", 0);
    }
    return r;
}

}  // namespace

ChatResponse HttpChatProvider::complete(const ChatRequest& request) {
    rate_limit();
    const char* key = std::getenv(options_.api_key_env.c_str());
    if (!key || !*key)
        throw ProviderError(ProviderErrorKind::Auth,
                            "missing credential in $" + options_.api_key_env);

    auto [base, path] = split_url(endpoint_);
    httplib::Client client(base);
    client.set_connection_timeout(options_.timeout.count(), 0);
    client.set_read_timeout(options_.timeout.count(), 0);

    httplib::Headers headers;
    nlohmann::json body;
    if (dialect_ == WireDialect::Gemini) {
        headers.emplace("x-goog-api-key", key);
        body = gemini_body(request);
    } else {
        headers.emplace("Authorization", std::string("Bearer ") + key);
        body = generic_body(request);
    }

    auto result = client.Post(path, headers, body.dump(), "application/json");
    if (!result) {
        auto err = result.error();
        if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read)
            throw ProviderError(ProviderErrorKind::Timeout, httplib::to_string(err));
        throw ProviderError(ProviderErrorKind::Transport, httplib::to_string(err));
    }
    if (result->status == 401 || result->status == 403)
        throw ProviderError(ProviderErrorKind::Auth,
                            "HTTP " + std::to_string(result->status));
    if (result->status == 429)
        throw ProviderError(ProviderErrorKind::RateLimit, "HTTP 429");
    if (result->status >= 500)
        throw ProviderError(ProviderErrorKind::Transport,
                            "HTTP " + std::to_string(result->status));
    if (result->status != 200)
        throw ProviderError(ProviderErrorKind::Malformed,
                            "HTTP " + std::to_string(result->status) + ": " +
                                result->body);

    try {
        auto j = nlohmann::json::parse(result->body);
        ChatResponse response =
            dialect_ == WireDialect::Gemini ? parse_gemini(j) : parse_generic(j);
        if (response.finish_reason == FinishReason::ContentFilter)
            throw ProviderError(ProviderErrorKind::ContentFilter,
                                "response blocked by provider filter");
        if (response.content.empty() && response.finish_reason == FinishReason::Stop)
            throw ProviderError(ProviderErrorKind::Malformed,
                                "empty content with finish_reason=stop");
        return response;
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(ProviderErrorKind::Malformed,
                            std::string("unparseable response body: ") + e.what());
    }
}

}  // namespace malea
