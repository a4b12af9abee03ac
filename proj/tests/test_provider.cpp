#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include <json.hpp>

#include "malea/provider.hpp"

using namespace malea;
namespace fs = std::filesystem;

namespace {

ChatRequest sample_request(const std::string& content = "hello") {
    ChatRequest r;
    r.system_prompt = "system";
    r.history = {{"user", content}};
    r.temperature = 0.2;
    r.model_name = "m";
    return r;
}

struct TempFile {
    fs::path path;
    explicit TempFile(const char* name)
        : path(fs::temp_directory_path() / (std::string("malea_test_") + name)) {}
    ~TempFile() { std::error_code ec; fs::remove(path, ec); }
};

}  // namespace

TEST_CASE("scripted provider returns queued content") {
    ScriptedProvider provider;
    provider.push_response("A");
    CHECK(provider.complete(sample_request()).content == "A");
    CHECK(provider.calls() == 1);
}

TEST_CASE("error taxonomy: retryability") {
    CHECK(is_retryable(ProviderErrorKind::RateLimit));
    CHECK(is_retryable(ProviderErrorKind::Timeout));
    CHECK(is_retryable(ProviderErrorKind::Transport));
    CHECK_FALSE(is_retryable(ProviderErrorKind::Auth));
    CHECK_FALSE(is_retryable(ProviderErrorKind::ReplayMiss));
    CHECK_FALSE(is_retryable(ProviderErrorKind::ContentFilter));
    CHECK_FALSE(is_retryable(ProviderErrorKind::Malformed));
}

TEST_CASE("retry: transport errors retried 5 times with 1+2+4+8s nominal backoff") {
    // Oracle: the sum of the configured schedule.
    BackoffPolicy policy;
    auto schedule = policy.schedule();
    std::chrono::milliseconds expected_total{0};
    std::chrono::milliseconds delay = policy.base;
    for (int i = 0; i + 1 < policy.max_attempts; ++i) {
        expected_total += delay;
        delay *= 2;
    }
    CHECK(expected_total == std::chrono::milliseconds(15000));
    CHECK(schedule.size() == 4);

    auto inner = std::make_shared<ScriptedProvider>();
    for (int i = 0; i < 5; ++i)
        inner->push_error(ProviderErrorKind::Transport, "unreachable");

    std::chrono::milliseconds slept{0};
    RetryingProvider retrying(inner, policy,
                              [&](std::chrono::milliseconds d) { slept += d; });
    CHECK_THROWS_AS(retrying.complete(sample_request()), ProviderError);
    CHECK(inner->calls() == 5);
    CHECK(slept == expected_total);
}

TEST_CASE("retry: non-retryable errors surface immediately") {
    auto inner = std::make_shared<ScriptedProvider>();
    inner->push_error(ProviderErrorKind::Auth, "bad key");
    int sleeps = 0;
    RetryingProvider retrying(inner, {}, [&](auto) { ++sleeps; });
    CHECK_THROWS_AS(retrying.complete(sample_request()), ProviderError);
    CHECK(inner->calls() == 1);
    CHECK(sleeps == 0);
}

TEST_CASE("canonical hashing: field-order insensitive, content sensitive") {
    ChatRequest a = sample_request("x");
    CHECK(request_hash(a) == request_hash(a));

    // Canonicalization sorts keys, so two serializations of the same request
    // hash identically.
    auto j1 = nlohmann::json::parse(
        R"({"history":[{"content":"x","role":"user"}],"model":"m","system":"system","temperature":0.2})");
    auto j2 = nlohmann::json::parse(
        R"({"temperature":0.2,"system":"system","model":"m","history":[{"role":"user","content":"x"}]})");
    CHECK(j1.dump() == j2.dump());
    CHECK(canonical_request(a) == j1.dump());

    ChatRequest b = a;
    b.history[0].content = "y";
    CHECK(request_hash(a) != request_hash(b));

    ChatRequest c = a;
    c.temperature = 0.3;
    CHECK(request_hash(a) != request_hash(c));

    ChatRequest d = a;
    d.seed = 7;
    CHECK(request_hash(a) != request_hash(d));
}

TEST_CASE("record then replay is byte-identical; out-of-order lookups work") {
    TempFile cassette("cassette.jsonl");

    auto inner = std::make_shared<ScriptedProvider>();
    inner->push_response("first");
    inner->push_response("second");
    inner->push_response("third");

    RecordingProvider recorder(inner, cassette.path);
    std::vector<std::string> recorded;
    for (const char* q : {"q1", "q2", "q3"})
        recorded.push_back(recorder.complete(sample_request(q)).content);

    ReplayProvider replay(cassette.path);
    // Out of request order: hash lookup semantics.
    CHECK(replay.complete(sample_request("q3")).content == recorded[2]);
    CHECK(replay.complete(sample_request("q1")).content == recorded[0]);
    CHECK(replay.complete(sample_request("q2")).content == recorded[1]);
}

TEST_CASE("replay miss is a non-retryable ReplayMiss error") {
    ReplayProvider replay(std::vector<CassetteEntry>{});
    try {
        replay.complete(sample_request("unknown"));
        FAIL("expected ReplayMiss");
    } catch (const ProviderError& e) {
        CHECK(e.kind() == ProviderErrorKind::ReplayMiss);
        CHECK_FALSE(e.retryable());
    }
}

TEST_CASE("empty session records an empty, valid cassette") {
    TempFile cassette("empty_cassette.jsonl");
    {
        RecordingProvider recorder(std::make_shared<ScriptedProvider>(), cassette.path);
    }
    auto entries = load_cassette(cassette.path);
    CHECK(entries.empty());
}

TEST_CASE("dialect detection from endpoint") {
    CHECK(dialect_for_endpoint("https://generativelanguage.googleapis.com/v1beta/"
                               "models/gemini-1.5-flash:generateContent") ==
          WireDialect::Gemini);
    CHECK(dialect_for_endpoint("https://api.example.test/v1/chat/completions") ==
          WireDialect::Generic);
}

TEST_CASE("live provider without credentials fails with Auth") {
    HttpProviderOptions options;
    options.api_key_env = "MALEA_TEST_NO_SUCH_KEY";
    HttpChatProvider provider("https://localhost:1/v1/chat/completions", options);
    try {
        provider.complete(sample_request());
        FAIL("expected Auth error");
    } catch (const ProviderError& e) {
        CHECK(e.kind() == ProviderErrorKind::Auth);
    }
}
