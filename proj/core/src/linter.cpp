#include "malea/linter.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>

#include "malea/story_codec.hpp"

namespace malea {

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

bool word_boundary(const std::string& text, std::size_t pos, std::size_t len) {
    auto is_word = [](unsigned char c) { return std::isalnum(c) || c == '-'; };
    if (pos > 0 && is_word(text[pos - 1])) return false;
    if (pos + len < text.size() && is_word(text[pos + len])) return false;
    return true;
}

/// Find a term case-insensitively on word boundaries; npos if absent.
std::size_t find_term(const std::string& text, const std::string& term) {
    std::string haystack = lower(text);
    std::string needle = lower(term);
    std::size_t pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string::npos) {
        if (word_boundary(haystack, pos, needle.size())) return pos;
        ++pos;
    }
    return std::string::npos;
}

// Verbs that commonly open a coordinated want-clause goal.
const std::vector<std::string> kGoalVerbs = {
    "access",  "add",     "analyze", "appeal", "be",      "browse", "change",
    "check",   "choose",  "compare", "configure", "contact", "control",
    "create",  "customize", "delete", "disable", "download", "edit", "enable",
    "export",  "filter",  "find",    "get",    "have",    "import", "know",
    "learn",   "manage",  "modify",  "monitor", "opt",    "receive", "report",
    "request", "review",  "search",  "see",    "select",  "send",   "share",
    "submit",  "track",   "understand", "update", "upload", "use",  "verify",
    "view"};

bool starts_with_goal_verb(const std::string& clause) {
    std::string c = trim(lower(clause));
    if (c.rfind("to ", 0) == 0) c = c.substr(3);
    auto space = c.find(' ');
    std::string first = space == std::string::npos ? c : c.substr(0, space);
    return std::find(kGoalVerbs.begin(), kGoalVerbs.end(), first) != kGoalVerbs.end();
}

void check_atomic(const UserStory& story, std::vector<Violation>& out) {
    const std::string& want = story.want_clause;
    std::string l = lower(want);
    for (const std::string& conj : {std::string(" and "), std::string(" or ")}) {
        std::size_t pos = 0;
        while ((pos = l.find(conj, pos)) != std::string::npos) {
            std::string tail = want.substr(pos + conj.size());
            if (starts_with_goal_verb(tail)) {
                out.push_back({QualityCriterion::Atomic, story.id, std::nullopt, pos,
                               pos + conj.size(),
                               "want clause coordinates two goals around \"" +
                                   trim(conj) + "\""});
                return;  // one point per criterion per story sentence
            }
            pos += conj.size();
        }
    }
}

void check_minimal(const UserStory& story, std::vector<Violation>& out) {
    auto flag_parenthetical = [&](const std::string& text, const char* where) {
        auto open = text.find('(');
        if (open == std::string::npos) return false;
        auto close = text.find(')', open);
        out.push_back({QualityCriterion::Minimal, story.id, std::nullopt, open,
                       close == std::string::npos ? text.size() : close + 1,
                       std::string("parenthetical aside in ") + where});
        return true;
    };
    if (flag_parenthetical(story.want_clause, "want clause")) return;
    if (story.benefit_clause) {
        if (flag_parenthetical(*story.benefit_clause, "benefit clause")) return;
        // Trailing note after the benefit sentence.
        auto period = story.benefit_clause->find(". ");
        if (period != std::string::npos) {
            out.push_back({QualityCriterion::Minimal, story.id, std::nullopt,
                           period + 2, story.benefit_clause->size(),
                           "extra sentence after the benefit clause"});
            return;
        }
    }
    // Criteria embedded in the story sentence itself.
    if (find_term(story.want_clause, "acceptance criteria") != std::string::npos) {
        out.push_back({QualityCriterion::Minimal, story.id, std::nullopt, 0,
                       story.want_clause.size(),
                       "criteria embedded in the story sentence"});
    }
}

void check_unambiguous(const UserStory& story, const Lexicon& lexicon,
                       std::vector<Violation>& out) {
    auto scan_clause = [&](const std::string& text) {
        for (const auto& term : lexicon.terms) {
            auto pos = find_term(text, term);
            if (pos != std::string::npos) {
                out.push_back({QualityCriterion::Unambiguous, story.id, std::nullopt,
                               pos, pos + term.size(),
                               "vague term \"" + term + "\""});
            }
        }
        // Placeholders belong in criteria, not in the story sentence.
        for (const auto& p : extract_placeholders(text).placeholders) {
            out.push_back({QualityCriterion::Unambiguous, story.id, std::nullopt,
                           p.begin, p.end,
                           "unresolved placeholder in the story sentence"});
        }
    };
    scan_clause(story.want_clause);
    if (story.benefit_clause) scan_clause(*story.benefit_clause);
}

bool is_measurable(const std::string& text) {
    static const std::regex percentage(R"(\d+(\.\d+)?\s*(%|percent))",
                                       std::regex::icase);
    if (std::regex_search(text, percentage)) return true;
    static const std::regex quantity_unit(
        R"(\d+(\.\d+)?\s*(ms|milliseconds?|seconds?|minutes?|hours?|days?|weeks?|months?|years?|requests?|users?|items?|characters?|pixels?|mb|gb|kb|fps|bits?|bytes?))",
        std::regex::icase);
    if (std::regex_search(text, quantity_unit)) return true;
    static const std::regex standard(
        R"(\b(WCAG|ISO\s?\d+|GDPR|HIPAA|TLS\s?[\d.]+|AES-?\d+|IEEE\s?\d+|RFC\s?\d+)\b)");
    if (std::regex_search(text, standard)) return true;
    // Enumerable condition: a universally quantified or exhaustive check.
    for (const char* marker : {"all ", "every ", "each ", "none of", "no "}) {
        if (find_term(text, trim(marker)) == 0 ||
            lower(text).find(std::string(" ") + marker) != std::string::npos)
            return true;
    }
    return false;
}

void check_estimable(const UserStory& story, std::vector<Violation>& out) {
    bool any = std::any_of(story.criteria.begin(), story.criteria.end(),
                           [](const AcceptanceCriterion& c) {
                               return is_measurable(c.text);
                           });
    if (!any) {
        out.push_back({QualityCriterion::Estimable, story.id, std::nullopt, 0,
                       story.want_clause.size(),
                       "no criterion carries a quantity, percentage, enumerable "
                       "condition, or named standard"});
    }
}

}  // namespace

std::string to_string(QualityCriterion criterion) {
    switch (criterion) {
        case QualityCriterion::Atomic: return "atomic";
        case QualityCriterion::Minimal: return "minimal";
        case QualityCriterion::Unambiguous: return "unambiguous";
        case QualityCriterion::Estimable: return "estimable";
    }
    return "?";
}

Lexicon Lexicon::default_lexicon() {
    return Lexicon{{
        "user-friendly", "user friendly", "appropriate", "fast",      "etc",
        "etc.",          "robust",        "easy",        "simple",    "efficient",
        "flexible",      "seamless",      "intuitive",   "quickly",   "reasonable",
        "adequate",      "good",          "better",      "some",      "several",
        "many",          "few",           "as needed",   "if possible",
        "state-of-the-art", "optimal",    "minimal",     "significant",
    }};
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open lexicon file: " + path.string());
    Lexicon lex;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (!line.empty()) lex.terms.push_back(line);
    }
    return lex;
}

std::vector<Violation> lint(const UserStory& story, const Lexicon& lexicon) {
    std::vector<Violation> out;
    check_atomic(story, out);
    check_minimal(story, out);
    check_unambiguous(story, lexicon, out);
    check_estimable(story, out);
    return out;
}

LintReport lint_report(const std::vector<UserStory>& stories, const Lexicon& lexicon) {
    LintReport report;
    report.totals = {{QualityCriterion::Atomic, 0},
                     {QualityCriterion::Minimal, 0},
                     {QualityCriterion::Unambiguous, 0},
                     {QualityCriterion::Estimable, 0}};
    for (const auto& story : stories) {
        auto violations = lint(story, lexicon);
        report.per_story[story.id] = static_cast<int>(violations.size());
        for (auto& v : violations) {
            ++report.totals[v.criterion];
            report.violations.push_back(std::move(v));
        }
    }
    return report;
}

}  // namespace malea
