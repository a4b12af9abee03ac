#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "malea/model.hpp"

namespace malea {

enum class QualityCriterion { Atomic, Minimal, Unambiguous, Estimable };

std::string to_string(QualityCriterion criterion);

struct Violation {
    QualityCriterion criterion = QualityCriterion::Atomic;
    std::string story_id;
    std::optional<std::string> criterion_id;
    std::size_t span_begin = 0;  // within the cited text
    std::size_t span_end = 0;
    std::string rationale;
};

/// Vague-term lexicon: one term per line, `#` comments. Matching is
/// case-insensitive on word boundaries.
struct Lexicon {
    std::vector<std::string> terms;

    static Lexicon default_lexicon();
    static Lexicon load(const std::filesystem::path& path);
};

/// Heuristic pre-check of the four story-level quality criteria. Each
/// violation names exactly one criterion. Annotates, never blocks.
///
/// Known false-positive classes: Atomic fires on noun-phrase "and" whose
/// right side happens to start with a verb-like word; Estimable cannot see
/// quantities spelled out in words; Minimal flags legitimate clarifying
/// parentheticals.
std::vector<Violation> lint(const UserStory& story, const Lexicon& lexicon);

struct LintReport {
    std::map<QualityCriterion, int> totals;
    std::map<std::string, int> per_story;  // story id -> violation count
    std::vector<Violation> violations;
};

LintReport lint_report(const std::vector<UserStory>& stories, const Lexicon& lexicon);

}  // namespace malea
