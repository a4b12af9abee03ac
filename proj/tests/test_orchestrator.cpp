#include <doctest.h>

#include <filesystem>
#include <memory>

#include "malea/orchestrator.hpp"
#include "malea/persona.hpp"

using namespace malea;

namespace {

const char* kStoryText =
    "As a user, I want to see when output comes from an AI model, so that I can "
    "judge it accordingly.\n\n"
    "Acceptance Criteria:\n"
    "- Every AI-generated message carries a visible label.\n";

const char* kDocText =
    "# Ethics Requirements\n\n"
    "## US-1\n\n"
    "As a user, I want to see when output comes from an AI model, so that I can "
    "judge it accordingly.\n\n"
    "Acceptance Criteria:\n"
    "- AC-1.1: Every AI-generated message carries a visible label.\n";

SystemDescription description() {
    return SystemDescription::make("Demo", "An AI-assisted note taking app.");
}

Message message(int seq, AgentRole role, Phase phase, std::string content) {
    Message m;
    m.seq = seq;
    m.role = role;
    m.phase = phase;
    m.content = std::move(content);
    return m;
}

}  // namespace

TEST_CASE("immediate approvals: four calls, zero critiques, documentarian wins") {
    ScriptedProvider provider;
    provider.push_response(kStoryText);
    provider.push_response("The requirements are approved from a quality point of view.");
    provider.push_response("The requirements are approved from an ethics point of view.");
    provider.push_response(kDocText);

    RunConfig cfg;
    SessionOptions options;
    options.clock = fixed_clock();
    SessionResult result = run_session(cfg, description(), provider, options);

    CHECK(result.status == SessionStatus::Ok);
    CHECK(result.provider_calls == 4);
    CHECK(result.qa_critiques_used == 0);
    CHECK(result.ea_critiques_used == 0);
    CHECK(result.qa_termination == TerminationCause::Approved);
    CHECK(result.ea_termination == TerminationCause::Approved);
    CHECK(result.final_document == kDocText);
    REQUIRE(result.stories.size() == 1);
    CHECK(result.stories[0].criteria.size() == 1);

    // Initiator + 4 agent turns; no synthetic messages.
    REQUIRE(result.transcript.messages.size() == 5);
    CHECK(result.transcript.messages[0].role == AgentRole::Controller);
    CHECK(result.transcript.messages[4].role == AgentRole::Documentarian);
    CHECK(result.transcript.messages[0].timestamp_ms == 1700000000000);
    CHECK(result.transcript.messages[4].timestamp_ms == 1700000004000);
}

TEST_CASE("critics that never approve: exactly 2 + 4 * max_cycles calls") {
    auto run_never_approve = [](int max_cycles) {
        ScriptedProvider provider;
        provider.push_response(kStoryText);  // draft
        for (int phase = 0; phase < 2; ++phase) {
            for (int c = 0; c < max_cycles; ++c) {
                provider.push_response("Please tighten the wording of every story.");
                provider.push_response(kStoryText);  // paired revision
            }
        }
        provider.push_response(kDocText);  // documentarian

        RunConfig cfg;
        cfg.max_critique_cycles = max_cycles;
        SessionOptions options;
        options.clock = fixed_clock();
        return run_session(cfg, description(), provider, options);
    };

    SessionResult defaults = run_never_approve(2);
    CHECK(defaults.status == SessionStatus::Ok);
    CHECK(defaults.provider_calls == 10);
    CHECK(defaults.qa_critiques_used == 2);
    CHECK(defaults.ea_critiques_used == 2);
    CHECK(defaults.qa_termination == TerminationCause::CycleLimit);
    CHECK(defaults.ea_termination == TerminationCause::CycleLimit);
    // The last agent to speak is the documentarian and its text is final.
    CHECK(defaults.final_document == kDocText);
    CHECK(defaults.transcript.messages.back().role == AgentRole::Documentarian);

    SessionResult single = run_never_approve(1);
    CHECK(single.provider_calls == 6);
    SessionResult triple = run_never_approve(3);
    CHECK(triple.provider_calls == 14);
}

TEST_CASE("approval after one critique counts one cycle") {
    ScriptedProvider provider;
    provider.push_response(kStoryText);
    provider.push_response("Story 1 is not atomic; split it.");
    provider.push_response(kStoryText);
    provider.push_response("The requirements are approved from a quality point of view.");
    provider.push_response("The requirements are approved from an ethics point of view.");
    provider.push_response(kDocText);

    RunConfig cfg;
    SessionOptions options;
    options.clock = fixed_clock();
    SessionResult result = run_session(cfg, description(), provider, options);
    CHECK(result.status == SessionStatus::Ok);
    CHECK(result.provider_calls == 6);
    CHECK(result.qa_critiques_used == 1);
    CHECK(result.ea_critiques_used == 0);
    CHECK(result.qa_termination == TerminationCause::Approved);
}

TEST_CASE("step: hand-walked state transitions") {
    RunConfig cfg;
    SessionState s;
    CHECK(next_speaker(s) == AgentRole::RequirementsEngineer);

    s = step(std::move(s), message(1, AgentRole::RequirementsEngineer,
                                   Phase::Drafting, kStoryText), cfg);
    CHECK(s.phase == Phase::QualityReview);
    CHECK(next_speaker(s) == AgentRole::QualityAssurance);

    s = step(std::move(s), message(2, AgentRole::QualityAssurance,
                                   Phase::QualityReview, "Not atomic."), cfg);
    CHECK(s.qa_critiques_used == 1);
    CHECK(s.awaiting_revision);
    CHECK(next_speaker(s) == AgentRole::RequirementsEngineer);

    s = step(std::move(s), message(3, AgentRole::RequirementsEngineer,
                                   Phase::QualityReview, kStoryText), cfg);
    CHECK_FALSE(s.awaiting_revision);
    CHECK(s.phase == Phase::QualityReview);  // one of two cycles used

    s = step(std::move(s), message(4, AgentRole::QualityAssurance, Phase::QualityReview,
                                   "The requirements are approved from a quality "
                                   "point of view."), cfg);
    CHECK(s.phase == Phase::EthicsReview);
    CHECK(s.qa_termination == TerminationCause::Approved);
    CHECK(s.qa_critiques_used == 1);  // approval does not increment

    s = step(std::move(s), message(5, AgentRole::EthicsAdvocate, Phase::EthicsReview,
                                   "The requirements are approved from an ethics "
                                   "point of view."), cfg);
    CHECK(s.phase == Phase::Documentation);

    s = step(std::move(s), message(6, AgentRole::Documentarian,
                                   Phase::Documentation, kDocText), cfg);
    CHECK(s.phase == Phase::Done);
    CHECK(s.final_document == kDocText);
    CHECK_THROWS_AS(next_speaker(s), ProtocolViolation);
}

TEST_CASE("step: the final permitted critique still gets its revision") {
    RunConfig cfg;
    cfg.max_critique_cycles = 1;
    SessionState s;
    s = step(std::move(s), message(1, AgentRole::RequirementsEngineer,
                                   Phase::Drafting, kStoryText), cfg);
    s = step(std::move(s), message(2, AgentRole::QualityAssurance,
                                   Phase::QualityReview, "Vague."), cfg);
    CHECK(s.qa_critiques_used == 1);
    CHECK(next_speaker(s) == AgentRole::RequirementsEngineer);
    s = step(std::move(s), message(3, AgentRole::RequirementsEngineer,
                                   Phase::QualityReview, kStoryText), cfg);
    // Counter reached the maximum; the revision lands, then the phase ends.
    CHECK(s.phase == Phase::EthicsReview);
    CHECK(s.qa_termination == TerminationCause::CycleLimit);
    CHECK(s.current_draft == kStoryText);
}

TEST_CASE("step: wrong speaker for the phase is a protocol violation") {
    RunConfig cfg;
    SessionState s;
    CHECK_THROWS_AS(step(s, message(1, AgentRole::QualityAssurance,
                                    Phase::Drafting, "hi"), cfg),
                    ProtocolViolation);

    s.phase = Phase::QualityReview;
    s.awaiting_revision = true;
    CHECK_THROWS_AS(step(s, message(1, AgentRole::QualityAssurance,
                                    Phase::QualityReview, "more feedback"), cfg),
                    ProtocolViolation);
}

TEST_CASE("invalid cycle budget is rejected before any provider call") {
    ScriptedProvider provider;
    RunConfig cfg;
    cfg.max_critique_cycles = 0;
    CHECK_THROWS_AS(run_session(cfg, description(), provider, {}), ConfigError);
    CHECK(provider.calls() == 0);
}

TEST_CASE("unparseable draft triggers one synthetic reformat request, no extra call") {
    ScriptedProvider provider;
    provider.push_response("Here are some thoughts, in no particular format.");
    provider.push_response("Please use the user story format.");  // QA critique
    provider.push_response(kStoryText);                           // RE revision
    provider.push_response("The requirements are approved from a quality point of view.");
    provider.push_response("The requirements are approved from an ethics point of view.");
    provider.push_response(kDocText);

    RunConfig cfg;
    SessionOptions options;
    options.clock = fixed_clock();
    SessionResult result = run_session(cfg, description(), provider, options);

    CHECK(result.status == SessionStatus::Ok);
    CHECK(result.provider_calls == 6);
    int controller_messages = 0;
    for (const auto& m : result.transcript.messages)
        if (m.role == AgentRole::Controller) ++controller_messages;
    CHECK(controller_messages == 2);  // initiator + one reformat request
}

TEST_CASE("provider failure mid-session keeps the partial transcript") {
    ScriptedProvider provider;
    provider.push_response(kStoryText);
    provider.push_error(ProviderErrorKind::Timeout, "deadline exceeded");

    RunConfig cfg;
    SessionResult result = run_session(cfg, description(), provider, {});
    CHECK(result.status == SessionStatus::ProviderFailure);
    CHECK(result.provider_calls == 1);
    CHECK(result.transcript.messages.size() == 2);  // initiator + draft
    CHECK(result.stories.empty());
}

TEST_CASE("agent requests carry the persona system prompt and labeled history") {
    ScriptedProvider provider;
    provider.push_response(kStoryText);
    provider.push_response("The requirements are approved from a quality point of view.");
    provider.push_response("The requirements are approved from an ethics point of view.");
    provider.push_response(kDocText);

    RunConfig cfg;
    run_session(cfg, description(), provider, {});

    REQUIRE(provider.requests().size() == 4);
    const ChatRequest& draft_req = provider.requests()[0];
    PersonaPrompt re = build_persona(AgentRole::RequirementsEngineer, cfg.themes, cfg);
    CHECK(draft_req.system_prompt == re.text);
    REQUIRE(draft_req.history.size() == 1);
    CHECK(draft_req.history[0].role == "user");
    CHECK(draft_req.history[0].content.rfind("[controller]\n", 0) == 0);

    // The QA request sees the RE draft as a labeled user turn.
    const ChatRequest& qa_req = provider.requests()[1];
    REQUIRE(qa_req.history.size() == 2);
    CHECK(qa_req.history[1].content ==
          std::string("[requirements_engineer]\n") + kStoryText);

    // The RE sees its own prior turns as assistant turns (second session,
    // with a critique in between).
    ScriptedProvider p2;
    p2.push_response(kStoryText);
    p2.push_response("Split story 1.");
    p2.push_response(kStoryText);
    p2.push_response("The requirements are approved from a quality point of view.");
    p2.push_response("The requirements are approved from an ethics point of view.");
    p2.push_response(kDocText);
    run_session(cfg, description(), p2, {});
    const ChatRequest& revision_req = p2.requests()[2];
    REQUIRE(revision_req.history.size() == 3);
    CHECK(revision_req.history[1].role == "assistant");
    CHECK(revision_req.history[1].content == kStoryText);
    CHECK(revision_req.history[2].role == "user");
}

TEST_CASE("baseline run: one call, parsed like the multi-agent output") {
    ScriptedProvider provider;
    provider.push_response(kStoryText);
    RunConfig cfg;
    SessionOptions options;
    options.clock = fixed_clock();
    SessionResult result = run_baseline(cfg, description(), provider, options);
    CHECK(result.status == SessionStatus::Ok);
    CHECK(result.provider_calls == 1);
    CHECK(result.stories.size() == 1);
    REQUIRE(provider.requests().size() == 1);
    CHECK(provider.requests()[0].system_prompt.empty());
    CHECK(provider.requests()[0].history.size() == 1);

    ScriptedProvider failing;
    failing.push_error(ProviderErrorKind::Timeout, "deadline");
    SessionResult failed = run_baseline(cfg, description(), failing, options);
    CHECK(failed.status == SessionStatus::ProviderFailure);
    CHECK(failed.transcript.messages.size() == 1);

    ScriptedProvider rambling;
    rambling.push_response("No stories here, only prose.");
    SessionResult unparsed = run_baseline(cfg, description(), rambling, options);
    CHECK(unparsed.status == SessionStatus::ParseFailure);
}

TEST_CASE("record then replay reproduces the session exactly") {
    namespace fs = std::filesystem;
    fs::path cassette = fs::temp_directory_path() / "malea_orch_cassette.jsonl";

    RunConfig cfg;
    SessionOptions options;
    options.clock = fixed_clock();

    auto scripted = std::make_shared<ScriptedProvider>();
    scripted->push_response(kStoryText);
    scripted->push_response("The requirements are approved from a quality point of view.");
    scripted->push_response("The requirements are approved from an ethics point of view.");
    scripted->push_response(kDocText);
    RecordingProvider recorder(scripted, cassette);
    SessionResult original = run_session(cfg, description(), recorder, options);
    REQUIRE(original.status == SessionStatus::Ok);

    ReplayProvider replay(cassette);
    SessionResult replayed = run_session(cfg, description(), replay, options);
    CHECK(replayed.status == SessionStatus::Ok);
    CHECK(replayed.final_document == original.final_document);
    REQUIRE(replayed.transcript.messages.size() == original.transcript.messages.size());
    for (std::size_t i = 0; i < original.transcript.messages.size(); ++i) {
        CHECK(replayed.transcript.messages[i].content ==
              original.transcript.messages[i].content);
        CHECK(replayed.transcript.messages[i].timestamp_ms ==
              original.transcript.messages[i].timestamp_ms);
    }
    fs::remove(cassette);
}

TEST_CASE("fixed clock is base plus one second per message") {
    auto clock = fixed_clock();
    CHECK(clock(0) == 1700000000000);
    CHECK(clock(3) == 1700000003000);
    CHECK(fixed_clock(5000)(2) == 7000);
}
