#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace malea {

/// Raised for invalid or missing configuration values.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Theme { Transparency, Fairness, Data };

std::string to_string(Theme theme);
Theme theme_from_string(const std::string& name);

/// One ethics theme and the topic labels grouped under it.
struct EthicsTheme {
    Theme theme;
    std::vector<std::string> topics;

    bool operator==(const EthicsTheme&) const = default;
};

/// The shipped 12-topic taxonomy across Transparency, Fairness, and Data.
/// Stable ordering; deterministic across calls.
std::vector<EthicsTheme> default_taxonomy();

/// Parse a taxonomy file: `[Theme]` section headers followed by one topic
/// label per line. `#` starts a comment.
std::vector<EthicsTheme> load_taxonomy(const std::filesystem::path& path);

enum class AgentRole {
    RequirementsEngineer,
    QualityAssurance,
    EthicsAdvocate,
    Documentarian,
    Controller,
};

std::string to_string(AgentRole role);
AgentRole role_from_string(const std::string& name);

/// Prose description of the system whose ethics requirements are drafted.
struct SystemDescription {
    std::string title;
    std::string body;

    /// Throws ConfigError if body is empty after whitespace trimming.
    static SystemDescription make(std::string title, std::string body);
    static SystemDescription from_file(const std::filesystem::path& path);
};

enum class Phase { Drafting, QualityReview, EthicsReview, Documentation, Done };

std::string to_string(Phase phase);
Phase phase_from_string(const std::string& name);

struct Message {
    int seq = 0;
    AgentRole role = AgentRole::Controller;
    Phase phase = Phase::Drafting;
    std::string content;
    int tokens_in = 0;
    int tokens_out = 0;
    std::int64_t timestamp_ms = 0;
};

struct RunConfig {
    std::string provider_endpoint;
    std::string model_name = "gemini-1.5-flash";
    double temperature = 0.2;
    std::optional<std::int64_t> seed;
    int max_critique_cycles = 2;
    std::vector<EthicsTheme> themes = default_taxonomy();
    int min_stories = 5;

    /// Throws ConfigError on out-of-range values (temperature outside
    /// [0,2], max_critique_cycles < 1, min_stories < 1).
    void validate() const;

    static RunConfig from_file(const std::filesystem::path& path);
    static RunConfig from_json_text(const std::string& text);
    std::string to_json_text() const;
};

/// Ordered conversation record for one session.
struct Transcript {
    std::string session_id;
    RunConfig config_snapshot;
    std::vector<Message> messages;

    /// Enforces gapless, strictly increasing seq and non-decreasing phases.
    void append(Message message);
};

/// A `[PLACEHOLDER]` or `[PLACEHOLDER: description]` span inside a text.
struct Placeholder {
    std::size_t begin = 0;  // character offset of '['
    std::size_t end = 0;    // one past the closing ']'
    std::optional<std::string> description;

    bool operator==(const Placeholder&) const = default;
};

struct AcceptanceCriterion {
    std::string id;
    std::string text;
    std::vector<Placeholder> placeholders;  // derived from text at parse time
};

struct UserStory {
    std::string id;
    std::string role_clause;
    std::string want_clause;
    std::optional<std::string> benefit_clause;
    std::vector<AcceptanceCriterion> criteria;
    std::vector<std::string> themes;  // theme/topic tags, may be empty
};

/// One atomic requirement statement obtained by decomposing a criterion.
struct DiscreteRequirement {
    std::string id;
    std::string text;
    std::string source_story_id;
    std::optional<std::string> source_criterion_id;
};

}  // namespace malea
