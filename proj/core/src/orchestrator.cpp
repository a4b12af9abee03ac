#include "malea/orchestrator.hpp"

#include <chrono>

#include "malea/persona.hpp"
#include "malea/story_codec.hpp"

namespace malea {

std::string to_string(TerminationCause cause) {
    return cause == TerminationCause::Approved ? "approved" : "cycle_limit";
}

std::string to_string(SessionStatus status) {
    switch (status) {
        case SessionStatus::Ok: return "ok";
        case SessionStatus::ProviderFailure: return "provider_failure";
        case SessionStatus::ParseFailure: return "parse_failure";
    }
    return "?";
}

AgentRole next_speaker(const SessionState& state) {
    switch (state.phase) {
        case Phase::Drafting:
            return AgentRole::RequirementsEngineer;
        case Phase::QualityReview:
            return state.awaiting_revision ? AgentRole::RequirementsEngineer
                                           : AgentRole::QualityAssurance;
        case Phase::EthicsReview:
            return state.awaiting_revision ? AgentRole::RequirementsEngineer
                                           : AgentRole::EthicsAdvocate;
        case Phase::Documentation:
            return AgentRole::Documentarian;
        case Phase::Done:
            throw ProtocolViolation("session is complete; no speaker expected");
    }
    throw ProtocolViolation("invalid phase");
}

namespace {

void expect_role(AgentRole got, AgentRole want, const SessionState& state) {
    if (got != want)
        throw ProtocolViolation("phase " + to_string(state.phase) + " expects " +
                                to_string(want) + ", got " + to_string(got));
}

void advance_phase(SessionState& state, Phase next) {
    state.phase = next;
    state.awaiting_revision = false;
    state.reformat_requested_this_phase = false;
}

void step_review(SessionState& state, const Message& incoming, const RunConfig& config,
                 AgentRole critic, int& critiques_used,
                 std::optional<TerminationCause>& termination, Phase next_phase) {
    if (state.awaiting_revision) {
        expect_role(incoming.role, AgentRole::RequirementsEngineer, state);
        state.current_draft = incoming.content;
        state.awaiting_revision = false;
        if (critiques_used >= config.max_critique_cycles) {
            termination = TerminationCause::CycleLimit;
            advance_phase(state, next_phase);
        }
        return;
    }
    expect_role(incoming.role, critic, state);
    if (approval_matcher(critic)(incoming.content)) {
        termination = TerminationCause::Approved;
        advance_phase(state, next_phase);
        return;
    }
    // The final permitted critique still gets its paired revision before the
    // phase ends.
    critiques_used = std::min(critiques_used + 1, config.max_critique_cycles);
    state.awaiting_revision = true;
}

}  // namespace

SessionState step(SessionState state, const Message& incoming, const RunConfig& config) {
    switch (state.phase) {
        case Phase::Drafting:
            expect_role(incoming.role, AgentRole::RequirementsEngineer, state);
            state.current_draft = incoming.content;
            advance_phase(state, Phase::QualityReview);
            return state;
        case Phase::QualityReview:
            step_review(state, incoming, config, AgentRole::QualityAssurance,
                        state.qa_critiques_used, state.qa_termination,
                        Phase::EthicsReview);
            return state;
        case Phase::EthicsReview:
            step_review(state, incoming, config, AgentRole::EthicsAdvocate,
                        state.ea_critiques_used, state.ea_termination,
                        Phase::Documentation);
            return state;
        case Phase::Documentation:
            expect_role(incoming.role, AgentRole::Documentarian, state);
            state.final_document = incoming.content;
            advance_phase(state, Phase::Done);
            return state;
        case Phase::Done:
            throw ProtocolViolation("no messages accepted after Done");
    }
    throw ProtocolViolation("invalid phase");
}

std::function<std::int64_t(int)> fixed_clock(std::int64_t base_ms) {
    return [base_ms](int seq) { return base_ms + 1000ll * seq; };
}

namespace {

std::function<std::int64_t(int)> wall_clock() {
    return [](int) {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::system_clock::now().time_since_epoch())
            .count();
    };
}

ChatRequest build_request(AgentRole speaker, const PersonaPrompt& persona,
                          const Transcript& transcript, const RunConfig& config) {
    ChatRequest request;
    request.system_prompt = persona.text;
    request.temperature = config.temperature;
    request.model_name = config.model_name;
    request.seed = config.seed;
    for (const auto& m : transcript.messages) {
        ChatTurn turn;
        if (m.role == speaker) {
            turn.role = "assistant";
            turn.content = m.content;
        } else {
            turn.role = "user";
            turn.content = "[" + to_string(m.role) + "]\n" + m.content;
        }
        request.history.push_back(std::move(turn));
    }
    return request;
}

struct SessionDriver {
    const RunConfig& config;
    Provider& provider;
    Transcript& transcript;
    std::function<std::int64_t(int)> clock;
    int provider_calls = 0;

    Message speak(AgentRole role, Phase phase, const PersonaPrompt& persona) {
        ChatRequest request = build_request(role, persona, transcript, config);
        ChatResponse response = provider.complete(request);
        ++provider_calls;
        Message m;
        m.seq = static_cast<int>(transcript.messages.size());
        m.role = role;
        m.phase = phase;
        m.content = response.content.empty() ? "(empty)" : response.content;
        m.tokens_in = response.tokens_in;
        m.tokens_out = response.tokens_out;
        m.timestamp_ms = clock(m.seq);
        transcript.append(m);
        return m;
    }

    void inject_controller(Phase phase, const std::string& content) {
        Message m;
        m.seq = static_cast<int>(transcript.messages.size());
        m.role = AgentRole::Controller;
        m.phase = phase;
        m.content = content;
        m.timestamp_ms = clock(m.seq);
        transcript.append(m);
    }
};

SessionResult finish(SessionResult result, SessionState& state) {
    result.final_document = state.final_document;
    result.qa_termination = state.qa_termination;
    result.ea_termination = state.ea_termination;
    result.qa_critiques_used = state.qa_critiques_used;
    result.ea_critiques_used = state.ea_critiques_used;
    if (result.status != SessionStatus::Ok) return result;
    ParseResult parsed = parse_stories(result.final_document);
    if (parsed.stories.empty()) {
        result.status = SessionStatus::ParseFailure;
        result.error_detail = "final document contains no parseable user stories";
    } else {
        result.stories = std::move(parsed.stories);
    }
    return result;
}

}  // namespace

SessionResult run_session(const RunConfig& config, const SystemDescription& description,
                          Provider& provider, const SessionOptions& options) {
    config.validate();

    SessionResult result;
    result.transcript.session_id = options.session_id;
    result.transcript.config_snapshot = config;

    auto clock = options.clock ? options.clock : wall_clock();
    SessionDriver driver{config, provider, result.transcript, clock};

    Message initiator = build_initiator(description, config);
    initiator.timestamp_ms = clock(0);
    result.transcript.append(initiator);

    const PersonaPrompt re_persona =
        build_persona(AgentRole::RequirementsEngineer, config.themes, config);
    const PersonaPrompt qa_persona =
        build_persona(AgentRole::QualityAssurance, config.themes, config);
    const PersonaPrompt ea_persona =
        build_persona(AgentRole::EthicsAdvocate, config.themes, config);
    const PersonaPrompt doc_persona =
        build_persona(AgentRole::Documentarian, config.themes, config);

    SessionState state;
    try {
        while (state.phase != Phase::Done) {
            AgentRole speaker = next_speaker(state);
            const PersonaPrompt* persona = nullptr;
            switch (speaker) {
                case AgentRole::RequirementsEngineer: persona = &re_persona; break;
                case AgentRole::QualityAssurance: persona = &qa_persona; break;
                case AgentRole::EthicsAdvocate: persona = &ea_persona; break;
                case AgentRole::Documentarian: persona = &doc_persona; break;
                default: throw ProtocolViolation("unexpected speaker");
            }
            Message m = driver.speak(speaker, state.phase, *persona);
            state = step(state, m, config);

            // An unparseable RE draft gets one synthetic reformat request
            // per phase, visible to the RE's next turn; it is neither a
            // critique cycle nor a provider call.
            if (speaker == AgentRole::RequirementsEngineer && state.phase != Phase::Done &&
                !state.reformat_requested_this_phase &&
                parse_stories(m.content).stories.empty()) {
                driver.inject_controller(
                    state.phase,
                    "Your last draft did not contain recognizable user stories. "
                    "In your next message, restate every requirement as \"As a "
                    "<role>, I want <goal>, so that <benefit>\" with acceptance "
                    "criteria bullets.");
                state.reformat_requested_this_phase = true;
            }
        }
    } catch (const ProviderError& e) {
        result.status = SessionStatus::ProviderFailure;
        result.error_detail = e.what();
    }

    result.provider_calls = driver.provider_calls;
    return finish(std::move(result), state);
}

SessionResult run_baseline(const RunConfig& config, const SystemDescription& description,
                           Provider& provider, const SessionOptions& options) {
    config.validate();

    SessionResult result;
    result.transcript.session_id = options.session_id;
    result.transcript.config_snapshot = config;

    auto clock = options.clock ? options.clock : wall_clock();

    Message initiator = build_initiator(description, config);
    initiator.timestamp_ms = clock(0);
    result.transcript.append(initiator);

    ChatRequest request;
    request.history = {{"user", initiator.content}};
    request.temperature = config.temperature;
    request.model_name = config.model_name;
    request.seed = config.seed;

    SessionState state;
    try {
        ChatResponse response = provider.complete(request);
        result.provider_calls = 1;
        Message m;
        m.seq = 1;
        m.role = AgentRole::RequirementsEngineer;
        m.phase = Phase::Drafting;
        m.content = response.content.empty() ? "(empty)" : response.content;
        m.tokens_in = response.tokens_in;
        m.tokens_out = response.tokens_out;
        m.timestamp_ms = clock(1);
        result.transcript.append(m);
        state.final_document = m.content;
        state.phase = Phase::Done;
    } catch (const ProviderError& e) {
        result.status = SessionStatus::ProviderFailure;
        result.error_detail = e.what();
    }

    return finish(std::move(result), state);
}

}  // namespace malea
