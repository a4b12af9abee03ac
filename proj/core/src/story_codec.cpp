#include "malea/story_codec.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "malea/provider.hpp"

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

std::string strip_bold(std::string s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '*' && i + 1 < s.size() && s[i + 1] == '*') {
            ++i;
            continue;
        }
        out += s[i];
    }
    return out;
}

struct DecoratedLine {
    std::string text;     // content with decoration stripped
    bool is_header = false;
    bool is_bullet = false;
};

DecoratedLine strip_decoration(const std::string& raw) {
    DecoratedLine out;
    std::string s = trim(raw);
    if (s.rfind("#", 0) == 0) {
        out.is_header = true;
        s = trim(s.substr(s.find_first_not_of('#')));
    }
    // Unordered bullets.
    if (!s.empty() && (s[0] == '-' || s[0] == '*' || s[0] == '+') &&
        s.size() > 1 && s[1] == ' ') {
        out.is_bullet = true;
        s = trim(s.substr(2));
    } else {
        // Ordered bullets: "1." / "1)".
        static const std::regex ordered(R"(^(\d+)[.)]\s+(.*)$)");
        std::smatch m;
        if (std::regex_match(s, m, ordered)) {
            out.is_bullet = true;
            s = trim(m[2]);
        }
    }
    s = trim(strip_bold(s));
    // Canonical labels from emitted documents.
    static const std::regex us_label(R"(^US-\d+\s*[:.]?\s*(.*)$)");
    static const std::regex ac_label(R"(^AC-\d+\.\d+\s*[:.]?\s*(.*)$)");
    std::smatch m;
    if (std::regex_match(s, m, us_label)) s = trim(m[1]);
    else if (std::regex_match(s, m, ac_label)) s = trim(m[1]);
    out.text = s;
    return out;
}

struct StoryMatch {
    std::string role, want;
    std::optional<std::string> benefit;
};

std::optional<StoryMatch> match_story(const std::string& line) {
    static const std::regex story(
        R"(^as an? (.+?), i want (.+?)(?:,? so that (.+?))?\.?$)",
        std::regex::icase);
    std::smatch m;
    if (!std::regex_match(line, m, story)) return std::nullopt;
    StoryMatch out;
    out.role = trim(m[1]);
    out.want = trim(m[2]);
    if (m[3].matched) out.benefit = trim(m[3]);
    return out;
}

bool is_criteria_heading(const std::string& line) {
    std::string l = lower(trim(line));
    if (!l.empty() && l.back() == ':') l.pop_back();
    return l == "acceptance criteria";
}

bool is_placeholder_index_heading(const std::string& line) {
    return lower(line).find("placeholder index") != std::string::npos;
}

void refresh_placeholders(AcceptanceCriterion& criterion) {
    criterion.placeholders = extract_placeholders(criterion.text).placeholders;
}

}  // namespace

PlaceholderScan extract_placeholders(std::string_view text) {
    PlaceholderScan scan;
    static const std::string keyword = "placeholder";
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '[') {
            ++i;
            continue;
        }
        // Case-insensitive keyword match after '['.
        std::size_t k = i + 1;
        std::size_t kw = 0;
        while (k < text.size() && kw < keyword.size() &&
               std::tolower(static_cast<unsigned char>(text[k])) == keyword[kw]) {
            ++k, ++kw;
        }
        if (kw != keyword.size()) {
            ++i;
            continue;
        }
        // Expect ']' or ':' next (after optional spaces before ':').
        std::optional<std::string> description;
        std::size_t end = std::string::npos;
        if (k < text.size() && text[k] == ']') {
            end = k + 1;
        } else if (k < text.size() && text[k] == ':') {
            // Bracket-balanced description.
            int depth = 1;
            std::size_t j = k + 1;
            for (; j < text.size(); ++j) {
                if (text[j] == '[') ++depth;
                else if (text[j] == ']' && --depth == 0) break;
            }
            if (j < text.size()) {
                description = trim(std::string(text.substr(k + 1, j - k - 1)));
                end = j + 1;
            }
        }
        if (end == std::string::npos) {
            scan.warnings.push_back("unterminated placeholder at offset " +
                                    std::to_string(i));
            ++i;
            continue;
        }
        scan.placeholders.push_back({i, end, description});
        i = end;
    }
    return scan;
}

ParseResult parse_stories(std::string_view text) {
    ParseResult result;
    UserStory* current = nullptr;
    bool skipping_index = false;

    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        if (trim(raw).empty()) continue;
        DecoratedLine line = strip_decoration(raw);
        if (line.text.empty()) continue;

        if (line.is_header && is_placeholder_index_heading(line.text)) {
            skipping_index = true;
            current = nullptr;
            continue;
        }

        if (auto story = match_story(line.text)) {
            skipping_index = false;
            UserStory s;
            s.role_clause = story->role;
            s.want_clause = story->want;
            s.benefit_clause = story->benefit;
            result.stories.push_back(std::move(s));
            current = &result.stories.back();
            continue;
        }

        if (skipping_index) continue;  // index entries are regenerable

        if (is_criteria_heading(line.text)) continue;

        if (line.is_header) {
            // Section breaks (titles, story headers) carry no content.
            current = nullptr;
            continue;
        }

        if (line.is_bullet && current) {
            AcceptanceCriterion c;
            c.text = line.text;
            refresh_placeholders(c);
            current->criteria.push_back(std::move(c));
            continue;
        }

        result.residue.push_back(trim(raw));
    }

    renumber(result.stories);
    return result;
}

void renumber(std::vector<UserStory>& stories) {
    for (std::size_t i = 0; i < stories.size(); ++i) {
        stories[i].id = "US-" + std::to_string(i + 1);
        for (std::size_t j = 0; j < stories[i].criteria.size(); ++j) {
            auto& c = stories[i].criteria[j];
            c.id = "AC-" + std::to_string(i + 1) + "." + std::to_string(j + 1);
            refresh_placeholders(c);
        }
    }
}

std::string emit_markdown(const std::vector<UserStory>& stories,
                          const std::string& title) {
    if (stories.empty())
        throw CodecError("cannot emit a final document with zero stories");

    std::vector<UserStory> numbered = stories;
    renumber(numbered);

    std::ostringstream out;
    out << "# " << title << "\n";
    for (const auto& story : numbered) {
        out << "\n## " << story.id << "\n\n";
        const std::string& role = story.role_clause;
        std::string head = lower(role.substr(0, 4));
        bool vowel = !role.empty() &&
                     std::string("aeiou").find(head.empty() ? ' ' : head[0]) !=
                         std::string::npos &&
        // "u" pronounced as a consonant ("user", "unique", "one-time").
                     head.rfind("use", 0) != 0 && head.rfind("uni", 0) != 0 &&
                     head.rfind("one", 0) != 0 && head.rfind("eu", 0) != 0;
        out << "As " << (vowel ? "an " : "a ") << role << ", I want "
            << story.want_clause;
        if (story.benefit_clause) out << ", so that " << *story.benefit_clause;
        out << ".\n";
        if (!story.criteria.empty()) {
            out << "\nAcceptance Criteria:\n\n";
            for (const auto& c : story.criteria)
                out << "- " << c.id << ": " << c.text << "\n";
        }
    }

    out << "\n## Placeholder Index\n\n";
    int count = 0;
    for (const auto& story : numbered) {
        for (const auto& c : story.criteria) {
            for (const auto& p : c.placeholders) {
                out << "- " << story.id << " / " << c.id << ": "
                    << p.description.value_or("(no description)") << "\n";
                ++count;
            }
        }
        auto story_sentence_placeholders =
            extract_placeholders(story.want_clause).placeholders;
        for (const auto& p : story_sentence_placeholders) {
            out << "- " << story.id << ": " << p.description.value_or("(no description)")
                << "\n";
            ++count;
        }
    }
    if (count == 0) out << "(none)\n";
    return out.str();
}

namespace {

const std::regex kModal(R"(\b(shall|must|should|will|may)\b)", std::regex::icase);

bool has_modal(const std::string& clause) {
    if (std::regex_search(clause, kModal)) return true;
    // "is/are" followed by a participle counts as an obligation.
    static const std::regex copula(R"(\b(is|are)\s+\w+ed\b)", std::regex::icase);
    return std::regex_search(clause, copula);
}

bool looks_like_verb_phrase(const std::string& clause) {
    auto space = clause.find(' ');
    std::string first = lower(clause.substr(0, space));
    if (first.size() > 2 && first.compare(first.size() - 2, 2, "ed") == 0) return true;
    static const std::vector<std::string> verbs = {
        "be",       "have",     "has",      "provide", "provides", "support",
        "supports", "maintain", "maintains", "ensure",  "ensures",  "display",
        "displays", "log",      "logs",     "report",  "reports",  "store",
        "stores",   "notify",   "notifies", "inform",  "informs"};
    return std::find(verbs.begin(), verbs.end(), first) != verbs.end();
}

/// Split a criterion on top-level " and " boundaries (outside brackets and
/// parentheses).
std::vector<std::string> top_level_conjuncts(const std::string& text) {
    std::vector<std::string> parts;
    int depth = 0;
    std::size_t start = 0;
    std::string l = lower(text);
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '[' || c == '(') ++depth;
        else if (c == ']' || c == ')') depth = std::max(0, depth - 1);
        if (depth == 0 && l.compare(i, 5, " and ") == 0) {
            std::size_t cut = i;
            // Fold a preceding comma into the separator.
            std::string head = trim(text.substr(start, cut - start));
            if (!head.empty() && head.back() == ',') head.pop_back();
            parts.push_back(trim(head));
            i += 4;
            start = i + 1;
        }
    }
    parts.push_back(trim(text.substr(start)));
    parts.erase(std::remove_if(parts.begin(), parts.end(),
                               [](const std::string& p) { return p.empty(); }),
                parts.end());
    return parts;
}

std::vector<std::string> split_obligations(const std::string& text) {
    auto parts = top_level_conjuncts(text);
    if (parts.size() < 2) return {text};

    bool all_modal = std::all_of(parts.begin(), parts.end(), has_modal);
    if (all_modal) return parts;

    // Shared-modal form: "X shall be VERBed ... and VERBed ..." distributes
    // the subject+modal prefix over each verb phrase.
    if (has_modal(parts[0])) {
        std::smatch m;
        if (std::regex_search(parts[0], m, kModal)) {
            std::size_t prefix_end = static_cast<std::size_t>(m.position(0)) +
                                     static_cast<std::size_t>(m.length(0));
            std::string rest = parts[0].substr(prefix_end);
            std::string be;
            if (lower(rest).rfind(" be ", 0) == 0) be = " be";
            std::string prefix = parts[0].substr(0, prefix_end) + be;
            bool tail_verbs = std::all_of(parts.begin() + 1, parts.end(),
                                          looks_like_verb_phrase);
            if (tail_verbs) {
                std::vector<std::string> out{parts[0]};
                for (std::size_t i = 1; i < parts.size(); ++i)
                    out.push_back(prefix + " " + parts[i]);
                return out;
            }
        }
    }
    return {text};
}

}  // namespace

std::vector<DiscreteRequirement> decompose(const UserStory& story, DecomposeMode mode,
                                           Provider* provider,
                                           std::vector<std::string>* warnings) {
    auto warn = [&](const std::string& w) {
        if (warnings) warnings->push_back(w);
    };

    auto rule_mode = [&]() {
        std::vector<DiscreteRequirement> out;
        int k = 0;
        if (story.criteria.empty()) {
            DiscreteRequirement r;
            r.id = story.id + ".R" + std::to_string(++k);
            r.text = story.want_clause;
            r.source_story_id = story.id;
            out.push_back(std::move(r));
            return out;
        }
        for (const auto& c : story.criteria) {
            for (const auto& clause : split_obligations(c.text)) {
                DiscreteRequirement r;
                r.id = story.id + ".R" + std::to_string(++k);
                r.text = clause;
                r.source_story_id = story.id;
                r.source_criterion_id = c.id;
                out.push_back(std::move(r));
            }
        }
        return out;
    };

    if (mode == DecomposeMode::Rule) return rule_mode();

    if (!provider)
        throw CodecError("llm-mode decompose requires a provider");

    std::ostringstream prompt;
    prompt << "Split each acceptance criterion below into independent, atomic "
              "requirement statements. Reply with one line per requirement in "
              "the exact form `<criterion-id> :: <requirement>`. Every "
              "criterion id must appear at least once.\n\n";
    for (const auto& c : story.criteria)
        prompt << c.id << ": " << c.text << "\n";

    ChatRequest request;
    request.system_prompt =
        "You decompose acceptance criteria into discrete requirement "
        "statements, one obligation per statement.";
    request.history = {{"user", prompt.str()}};
    request.temperature = 0.0;

    std::vector<DiscreteRequirement> out;
    try {
        ChatResponse response = provider->complete(request);
        std::istringstream lines(response.content);
        std::string line;
        int k = 0;
        while (std::getline(lines, line)) {
            auto sep = line.find("::");
            if (sep == std::string::npos) continue;
            std::string cid = trim(line.substr(0, sep));
            std::string req = trim(line.substr(sep + 2));
            if (req.empty()) continue;
            DiscreteRequirement r;
            r.id = story.id + ".R" + std::to_string(++k);
            r.text = req;
            r.source_story_id = story.id;
            r.source_criterion_id = cid;
            out.push_back(std::move(r));
        }
    } catch (const ProviderError& e) {
        warn(std::string("llm decompose failed (") + e.what() +
             "); falling back to rule mode");
        return rule_mode();
    }

    // Coverage check: every criterion id must be sourced at least once.
    for (const auto& c : story.criteria) {
        bool covered = std::any_of(out.begin(), out.end(), [&](const auto& r) {
            return r.source_criterion_id == c.id;
        });
        if (!covered) {
            warn("llm decompose did not cover " + c.id + "; falling back to rule mode");
            return rule_mode();
        }
    }
    return out;
}

void write_requirements_export(const std::filesystem::path& path,
                               const std::vector<UserStory>& stories,
                               const std::vector<DiscreteRequirement>& requirements) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw CodecError("cannot write requirements export: " + path.string());
    out << nlohmann::json{{"schema", "malea/requirements@1"}}.dump() << "\n";
    for (const auto& r : requirements) {
        nlohmann::json record{
            {"id", r.id},
            {"text", r.text},
            {"story_id", r.source_story_id},
        };
        record["criterion_id"] =
            r.source_criterion_id ? nlohmann::json(*r.source_criterion_id)
                                  : nlohmann::json(nullptr);
        nlohmann::json placeholders = nlohmann::json::array();
        for (const auto& p : extract_placeholders(r.text).placeholders)
            placeholders.push_back(p.description.value_or(""));
        record["placeholders"] = placeholders;
        nlohmann::json themes = nlohmann::json::array();
        for (const auto& s : stories)
            if (s.id == r.source_story_id)
                for (const auto& t : s.themes) themes.push_back(t);
        record["themes"] = themes;
        out << record.dump() << "\n";
    }
}

std::vector<DiscreteRequirement> load_requirements_export(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CodecError("cannot open requirements export: " + path.string());
    std::string line;
    if (!std::getline(in, line))
        throw CodecError("empty requirements export: " + path.string());
    try {
        auto header = nlohmann::json::parse(line);
        if (header.value("schema", "") != "malea/requirements@1")
            throw CodecError("unexpected requirements schema in " + path.string());
    } catch (const nlohmann::json::exception& e) {
        throw CodecError("bad requirements header: " + std::string(e.what()));
    }
    std::vector<DiscreteRequirement> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            DiscreteRequirement r;
            r.id = j.at("id").get<std::string>();
            r.text = j.at("text").get<std::string>();
            r.source_story_id = j.at("story_id").get<std::string>();
            if (j.contains("criterion_id") && !j["criterion_id"].is_null())
                r.source_criterion_id = j["criterion_id"].get<std::string>();
            out.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw CodecError("requirements line " + std::to_string(lineno) + ": " +
                             e.what());
        }
    }
    return out;
}

bool structurally_equal(const std::vector<UserStory>& a,
                        const std::vector<UserStory>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].role_clause != b[i].role_clause) return false;
        if (a[i].want_clause != b[i].want_clause) return false;
        if (a[i].benefit_clause != b[i].benefit_clause) return false;
        if (a[i].criteria.size() != b[i].criteria.size()) return false;
        for (std::size_t j = 0; j < a[i].criteria.size(); ++j)
            if (a[i].criteria[j].text != b[i].criteria[j].text) return false;
    }
    return true;
}

}  // namespace malea
