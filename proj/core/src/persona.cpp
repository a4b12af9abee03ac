#include "malea/persona.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace malea {

namespace {

const char* kAntiBleed =
    "Never speak as another agent or take on another agent's persona; respond "
    "only in your own role.";

std::string join_themes(const std::vector<EthicsTheme>& themes) {
    std::vector<std::string> names;
    names.reserve(themes.size());
    for (const auto& t : themes) names.push_back(to_string(t.theme));
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i > 0) out += (i + 1 == names.size()) ? (names.size() > 2 ? ", and " : " and ") : ", ";
        out += names[i];
    }
    return out;
}

std::string topic_listing(const std::vector<EthicsTheme>& themes) {
    std::ostringstream out;
    for (const auto& t : themes) {
        out << "- " << to_string(t.theme) << ": ";
        for (std::size_t i = 0; i < t.topics.size(); ++i) {
            if (i > 0) out << ", ";
            out << t.topics[i];
        }
        out << "\n";
    }
    return out.str();
}

/// Lowercase and collapse every run of non-alphanumeric characters into a
/// single space.
std::string normalize_for_match(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            if (pending_space && !out.empty()) out += ' ';
            pending_space = false;
            out += static_cast<char>(std::tolower(c));
        } else {
            pending_space = true;
        }
    }
    return out;
}

}  // namespace

bool PersonaPrompt::fragments_present() const {
    return std::all_of(verbatim_fragments.begin(), verbatim_fragments.end(),
                       [&](const std::string& f) {
                           return text.find(f) != std::string::npos;
                       });
}

std::string count_in_words(int n) {
    static const char* words[] = {
        "zero", "one", "two",    "three",    "four",     "five",     "six",
        "seven", "eight", "nine", "ten",     "eleven",   "twelve",   "thirteen",
        "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen",
        "twenty"};
    if (n >= 0 && n <= 20) return words[n];
    return std::to_string(n);
}

PersonaPrompt build_persona(AgentRole role, const std::vector<EthicsTheme>& themes,
                            const RunConfig& config) {
    PersonaPrompt persona;
    persona.role = role;
    std::ostringstream text;

    switch (role) {
        case AgentRole::RequirementsEngineer: {
            persona.verbatim_fragments = {
                "As a", "I want", "so that", "[PLACEHOLDER", kAntiBleed};
            text << "You are the requirements engineer in a group chat that "
                    "drafts ethics requirements for an AI-based system.\n\n"
                 << "Write every requirement as a user story of the form \"As "
                    "a <role>, I want <goal>, so that <benefit>\", each with "
                    "one or more testable acceptance criteria listed beneath "
                    "it under an \"Acceptance Criteria:\" heading.\n"
                 << "Produce at least " << count_in_words(config.min_stories)
                 << " user stories covering the " << join_themes(themes)
                 << " themes.\n"
                 << "When a concrete value, threshold, or policy detail needs "
                    "stakeholder input you do not have, insert a "
                    "[PLACEHOLDER: short description] tag instead of "
                    "inventing a value.\n"
                 << "When a critic sends feedback, revise the full set of "
                    "requirements and reply with the complete revised draft, "
                    "not a delta. Stay within the scope of the described "
                    "system; do not add features or requirements unrelated to "
                    "the critics' feedback.\n"
                 << kAntiBleed << "\n";
            break;
        }
        case AgentRole::QualityAssurance: {
            persona.verbatim_fragments = {
                phrases::kQualityCot, phrases::kQualityApproval, "atomic",
                "minimal", "unambiguous", "estimable", kAntiBleed};
            text << "You are the quality assurance agent in a group chat that "
                    "drafts ethics requirements for an AI-based system.\n\n"
                 << "Inspect the requirements engineer's latest draft against "
                    "four quality criteria: each user story must be atomic, "
                    "minimal, unambiguous, and estimable.\n"
                 << phrases::kQualityCot << "\n"
                 << "Only review quality; do not judge ethical coverage and "
                    "do not rewrite the requirements yourself.\n"
                 << "When the draft satisfies all four criteria, reply with "
                    "exactly this sentence: \"" << phrases::kQualityApproval
                 << ".\"\n"
                 << kAntiBleed << "\n";
            break;
        }
        case AgentRole::EthicsAdvocate: {
            persona.verbatim_fragments = {
                phrases::kEthicsCot, phrases::kEthicsApproval, kAntiBleed};
            text << "You are the ethics advocate in a group chat that drafts "
                    "ethics requirements for an AI-based system.\n\n"
                 << "Critique the requirements engineer's latest draft for "
                    "coverage of these ethical themes and topics:\n"
                 << topic_listing(themes)
                 << phrases::kEthicsCot << "\n"
                 << "Point out missing or weak coverage; do not rewrite the "
                    "requirements yourself and do not restart quality review.\n"
                 << "When the draft addresses the themes adequately, reply "
                    "with exactly this sentence: \"" << phrases::kEthicsApproval
                 << ".\"\n"
                 << kAntiBleed << "\n";
            break;
        }
        case AgentRole::Documentarian: {
            persona.verbatim_fragments = {"do not add", kAntiBleed};
            text << "You are the documentation assistant in a group chat that "
                    "drafts ethics requirements for an AI-based system.\n\n"
                 << "Assemble the approved requirements into one final "
                    "document: number the user stories, keep each story's "
                    "acceptance criteria beneath it, and preserve every "
                    "[PLACEHOLDER] tag exactly as written.\n"
                 << "You may reformat and renumber, but do not add, remove, "
                    "merge, or reword requirements.\n"
                 << kAntiBleed << "\n";
            break;
        }
        case AgentRole::Controller:
            throw ConfigError("the controller has no persona");
    }

    persona.text = text.str();
    return persona;
}

std::string initiator_text(const SystemDescription& description,
                           const RunConfig& config) {
    std::string sentence = phrases::kInitiatorTemplate;
    auto substitute = [&](const std::string& key, const std::string& value) {
        auto pos = sentence.find(key);
        if (pos != std::string::npos) sentence.replace(pos, key.size(), value);
    };
    substitute("{count}", count_in_words(config.min_stories));
    substitute("{themes}", join_themes(config.themes));
    return sentence + "\n\n" + description.body;
}

Message build_initiator(const SystemDescription& description,
                        const RunConfig& config) {
    Message m;
    m.seq = 0;
    m.role = AgentRole::Controller;
    m.phase = Phase::Drafting;
    m.content = initiator_text(description, config);
    return m;
}

std::function<bool(const std::string&)> approval_matcher(AgentRole role) {
    std::vector<std::string> phrases_for_role;
    switch (role) {
        case AgentRole::QualityAssurance:
            phrases_for_role = {normalize_for_match(phrases::kQualityApproval)};
            break;
        case AgentRole::EthicsAdvocate:
            phrases_for_role = {normalize_for_match(phrases::kEthicsApproval),
                                normalize_for_match(phrases::kEthicsApprovalAlt)};
            break;
        default:
            throw ConfigError("approval matcher is defined only for critic roles");
    }
    return [phrases_for_role](const std::string& text) {
        std::string normalized = normalize_for_match(text);
        return std::any_of(phrases_for_role.begin(), phrases_for_role.end(),
                           [&](const std::string& p) {
                               return normalized.find(p) != std::string::npos;
                           });
    };
}

PersonaPrompt load_persona_file(const std::filesystem::path& path, AgentRole role) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open persona file: " + path.string());
    PersonaPrompt persona;
    persona.role = role;
    std::string line;
    bool in_body = false;
    std::ostringstream body;
    while (std::getline(in, line)) {
        if (!in_body) {
            if (line.rfind("require: ", 0) == 0) {
                persona.verbatim_fragments.push_back(line.substr(9));
                continue;
            }
            if (line.empty()) {
                in_body = true;
                continue;
            }
            if (line.rfind("#", 0) == 0) continue;  // comment before body
            in_body = true;  // body starts at first non-manifest line
        }
        body << line << "\n";
    }
    persona.text = body.str();
    if (!persona.fragments_present())
        throw ConfigError("persona file " + path.string() +
                          " is missing a required verbatim fragment");
    return persona;
}

}  // namespace malea
