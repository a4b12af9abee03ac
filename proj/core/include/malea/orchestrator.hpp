#pragma once

#include <functional>
#include <optional>
#include <string>

#include "malea/model.hpp"
#include "malea/provider.hpp"

namespace malea {

/// A message arrived from a role the current phase does not expect.
class ProtocolViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class TerminationCause { Approved, CycleLimit };

std::string to_string(TerminationCause cause);

/// Pure conversation state; advanced one message at a time by step().
struct SessionState {
    Phase phase = Phase::Drafting;
    int qa_critiques_used = 0;
    int ea_critiques_used = 0;
    bool awaiting_revision = false;  // critic spoke, RE revision pending
    std::string current_draft;
    std::string final_document;
    std::optional<TerminationCause> qa_termination;
    std::optional<TerminationCause> ea_termination;
    bool reformat_requested_this_phase = false;
};

/// The role whose message the state expects next.
AgentRole next_speaker(const SessionState& state);

/// Deterministic transition: approval advances the phase, a critique
/// increments the phase counter and routes back to the requirements
/// engineer, and the counter reaching the maximum advances the phase after
/// the paired revision. Throws ProtocolViolation on a role/phase mismatch.
SessionState step(SessionState state, const Message& incoming, const RunConfig& config);

enum class SessionStatus { Ok, ProviderFailure, ParseFailure };

std::string to_string(SessionStatus status);

struct SessionResult {
    SessionStatus status = SessionStatus::Ok;
    std::string error_detail;
    std::string final_document;
    std::vector<UserStory> stories;
    Transcript transcript;  // partial on failure
    std::optional<TerminationCause> qa_termination;
    std::optional<TerminationCause> ea_termination;
    int qa_critiques_used = 0;
    int ea_critiques_used = 0;
    int provider_calls = 0;
};

struct SessionOptions {
    std::string session_id = "session";
    /// Timestamp source, called with the message seq. Defaults to wall
    /// clock; replay uses a fixed deterministic clock.
    std::function<std::int64_t(int seq)> clock;
};

/// Deterministic clock for replayed sessions: base + seq seconds.
std::function<std::int64_t(int)> fixed_clock(std::int64_t base_ms = 1700000000000);

/// Drive the full pipeline: initiator, draft, bounded quality and ethics
/// critique loops, then documentation. Issues at most
/// 2 + 4 * max_critique_cycles provider calls.
SessionResult run_session(const RunConfig& config, const SystemDescription& description,
                          Provider& provider, const SessionOptions& options = {});

/// Single-call baseline: the initiator text as a standalone prompt; the
/// response is parsed the same way as the multi-agent output.
SessionResult run_baseline(const RunConfig& config, const SystemDescription& description,
                           Provider& provider, const SessionOptions& options = {});

}  // namespace malea
