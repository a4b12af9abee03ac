#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "malea/model.hpp"

namespace malea {

/// A full system prompt for one agent plus the quoted substrings it must
/// contain verbatim.
struct PersonaPrompt {
    AgentRole role = AgentRole::Controller;
    std::string text;
    std::vector<std::string> verbatim_fragments;

    bool fragments_present() const;
};

namespace phrases {

inline constexpr const char* kQualityApproval =
    "The requirements are approved from a quality point of view";
inline constexpr const char* kEthicsApproval =
    "The requirements are approved from an ethics point of view";
// The source phrase prints the article ambiguously; both readings count.
inline constexpr const char* kEthicsApprovalAlt =
    "The requirements are approved from a ethics point of view";
inline constexpr const char* kQualityCot =
    "Think about each of the quality criteria carefully and report violations "
    "one point at a time, if present.";
inline constexpr const char* kEthicsCot =
    "Think about each of the ethical challenges and its sub-points carefully "
    "and solve it one step at a time.";
inline constexpr const char* kInitiatorTemplate =
    "Generate {count} or more ethics requirements, focusing on {themes}, in "
    "the form of user stories with acceptance criteria, for building a system "
    "with the following";

}  // namespace phrases

/// Build the system prompt for one of the four LLM agents. Pure function of
/// its inputs. Throws ConfigError for Controller (it never produces LLM
/// text) .
PersonaPrompt build_persona(AgentRole role, const std::vector<EthicsTheme>& themes,
                            const RunConfig& config);

/// The chat-initiator text: the fixed opening sentence (with min_stories and
/// theme names substituted) followed by the description body.
std::string initiator_text(const SystemDescription& description,
                           const RunConfig& config);

/// Initiator as the first transcript message (Controller, seq 0, Drafting).
Message build_initiator(const SystemDescription& description, const RunConfig& config);

/// Predicate matching the critic's approval sentence case-insensitively,
/// ignoring surrounding punctuation and whitespace. Throws ConfigError for
/// non-critic roles.
std::function<bool(const std::string&)> approval_matcher(AgentRole role);

/// Load a persona template file. Lines of the form `require: <fragment>` at
/// the top declare the verbatim-fragment manifest; the body follows after
/// the first blank line. Throws ConfigError if a required fragment is
/// missing from the body.
PersonaPrompt load_persona_file(const std::filesystem::path& path, AgentRole role);

/// Spell 1..20 in words ("five", "eight"); larger values fall back to
/// digits.
std::string count_in_words(int n);

}  // namespace malea
