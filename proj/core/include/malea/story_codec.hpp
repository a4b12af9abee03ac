#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "malea/model.hpp"

namespace malea {

class Provider;

class CodecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ParseResult {
    std::vector<UserStory> stories;
    std::vector<std::string> residue;  // lines not recognized, never dropped
};

/// Parse agent text into user stories. Tolerates markdown headers, bold
/// markers, and ordered/unordered bullets. "As a/an <role>, I want <want>
/// [, so that <benefit>]" lines open a story; bullet lines following it
/// (optionally under an "Acceptance Criteria" heading) become criteria.
ParseResult parse_stories(std::string_view text);

struct PlaceholderScan {
    std::vector<Placeholder> placeholders;  // disjoint, ordered left-to-right
    std::vector<std::string> warnings;      // e.g. unterminated brackets
};

/// Grammar: `[PLACEHOLDER]` or `[PLACEHOLDER: <description>]`, keyword
/// case-insensitive, description bracket-balanced.
PlaceholderScan extract_placeholders(std::string_view text);

/// Render the canonical final document: US-n / AC-n.m numbering plus a
/// placeholder index section. Throws CodecError on an empty story list.
std::string emit_markdown(const std::vector<UserStory>& stories,
                          const std::string& title = "Ethics Requirements");

enum class DecomposeMode { Rule, Llm };

/// Split a story's acceptance criteria into discrete requirements. Rule
/// mode is deterministic: one requirement per criterion unless the
/// criterion conjoins independent obligations, which split one per clause.
/// Llm mode asks the provider and falls back to rule mode when the answer
/// does not cover every criterion.
std::vector<DiscreteRequirement> decompose(const UserStory& story,
                                           DecomposeMode mode = DecomposeMode::Rule,
                                           Provider* provider = nullptr,
                                           std::vector<std::string>* warnings = nullptr);

/// Assign canonical US-n / AC-n.m ids and refresh derived placeholders.
void renumber(std::vector<UserStory>& stories);

/// Requirements export: JSONL with a schema header line, one record per
/// DiscreteRequirement {id, text, story_id, criterion_id, placeholders,
/// themes}.
void write_requirements_export(const std::filesystem::path& path,
                               const std::vector<UserStory>& stories,
                               const std::vector<DiscreteRequirement>& requirements);
std::vector<DiscreteRequirement> load_requirements_export(
    const std::filesystem::path& path);

/// Structural equality used by round-trip checks: clauses and criterion
/// texts, ignoring ids.
bool structurally_equal(const std::vector<UserStory>& a,
                        const std::vector<UserStory>& b);

}  // namespace malea
