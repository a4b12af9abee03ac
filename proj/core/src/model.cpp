#include "malea/model.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace malea {

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

std::string to_string(Theme theme) {
    switch (theme) {
        case Theme::Transparency: return "Transparency";
        case Theme::Fairness: return "Fairness";
        case Theme::Data: return "Data";
    }
    return "?";
}

Theme theme_from_string(const std::string& name) {
    if (name == "Transparency") return Theme::Transparency;
    if (name == "Fairness") return Theme::Fairness;
    if (name == "Data") return Theme::Data;
    throw ConfigError("unknown theme: " + name);
}

std::vector<EthicsTheme> default_taxonomy() {
    return {
        {Theme::Transparency,
         {"internal transparency", "external transparency", "explainability",
          "communication", "documentation", "traceability"}},
        {Theme::Fairness, {"system reliability", "accessibility", "inclusion"}},
        {Theme::Data, {"privacy", "data quality", "access to data"}},
    };
}

std::vector<EthicsTheme> load_taxonomy(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open taxonomy file: " + path.string());
    std::vector<EthicsTheme> themes;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("taxonomy line " + std::to_string(lineno) +
                                  ": unterminated section header");
            themes.push_back({theme_from_string(trim(line.substr(1, line.size() - 2))), {}});
        } else {
            if (themes.empty())
                throw ConfigError("taxonomy line " + std::to_string(lineno) +
                                  ": topic before any [Theme] header");
            themes.back().topics.push_back(line);
        }
    }
    return themes;
}

std::string to_string(AgentRole role) {
    switch (role) {
        case AgentRole::RequirementsEngineer: return "requirements_engineer";
        case AgentRole::QualityAssurance: return "quality_assurance";
        case AgentRole::EthicsAdvocate: return "ethics_advocate";
        case AgentRole::Documentarian: return "documentarian";
        case AgentRole::Controller: return "controller";
    }
    return "?";
}

AgentRole role_from_string(const std::string& name) {
    if (name == "requirements_engineer") return AgentRole::RequirementsEngineer;
    if (name == "quality_assurance") return AgentRole::QualityAssurance;
    if (name == "ethics_advocate") return AgentRole::EthicsAdvocate;
    if (name == "documentarian") return AgentRole::Documentarian;
    if (name == "controller") return AgentRole::Controller;
    throw ConfigError("unknown agent role: " + name);
}

std::string to_string(Phase phase) {
    switch (phase) {
        case Phase::Drafting: return "drafting";
        case Phase::QualityReview: return "quality_review";
        case Phase::EthicsReview: return "ethics_review";
        case Phase::Documentation: return "documentation";
        case Phase::Done: return "done";
    }
    return "?";
}

Phase phase_from_string(const std::string& name) {
    if (name == "drafting") return Phase::Drafting;
    if (name == "quality_review") return Phase::QualityReview;
    if (name == "ethics_review") return Phase::EthicsReview;
    if (name == "documentation") return Phase::Documentation;
    if (name == "done") return Phase::Done;
    throw ConfigError("unknown phase: " + name);
}

SystemDescription SystemDescription::make(std::string title, std::string body) {
    if (trim(body).empty())
        throw ConfigError("system description body is empty");
    return SystemDescription{std::move(title), std::move(body)};
}

SystemDescription SystemDescription::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open description file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string body = buf.str();
    // First markdown header line, if present, becomes the title.
    std::string title = path.stem().string();
    if (body.rfind("# ", 0) == 0) {
        auto eol = body.find('\n');
        title = trim(body.substr(2, eol == std::string::npos ? eol : eol - 2));
        body = eol == std::string::npos ? "" : body.substr(eol + 1);
    }
    return make(std::move(title), trim(body));
}

void RunConfig::validate() const {
    if (temperature < 0.0 || temperature > 2.0)
        throw ConfigError("temperature must be in [0,2]");
    if (max_critique_cycles < 1)
        throw ConfigError("max_critique_cycles must be >= 1");
    if (min_stories < 1)
        throw ConfigError("min_stories must be >= 1");
    if (themes.empty())
        throw ConfigError("themes must not be empty");
}

namespace {

nlohmann::json themes_to_json(const std::vector<EthicsTheme>& themes) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& t : themes)
        arr.push_back({{"theme", to_string(t.theme)}, {"topics", t.topics}});
    return arr;
}

std::vector<EthicsTheme> themes_from_json(const nlohmann::json& arr) {
    std::vector<EthicsTheme> themes;
    for (const auto& t : arr) {
        EthicsTheme et;
        et.theme = theme_from_string(t.at("theme").get<std::string>());
        et.topics = t.at("topics").get<std::vector<std::string>>();
        themes.push_back(std::move(et));
    }
    return themes;
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig cfg;
    try {
        if (j.contains("provider_endpoint"))
            cfg.provider_endpoint = j["provider_endpoint"].get<std::string>();
        if (j.contains("model_name")) cfg.model_name = j["model_name"].get<std::string>();
        if (j.contains("temperature")) cfg.temperature = j["temperature"].get<double>();
        if (j.contains("seed") && !j["seed"].is_null())
            cfg.seed = j["seed"].get<std::int64_t>();
        if (j.contains("max_critique_cycles"))
            cfg.max_critique_cycles = j["max_critique_cycles"].get<int>();
        if (j.contains("min_stories")) cfg.min_stories = j["min_stories"].get<int>();
        if (j.contains("themes")) cfg.themes = themes_from_json(j["themes"]);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

std::string RunConfig::to_json_text() const {
    nlohmann::json j{
        {"provider_endpoint", provider_endpoint},
        {"model_name", model_name},
        {"temperature", temperature},
        {"max_critique_cycles", max_critique_cycles},
        {"min_stories", min_stories},
        {"themes", themes_to_json(themes)},
    };
    if (seed) j["seed"] = *seed;
    return j.dump(2) + "\n";
}

void Transcript::append(Message message) {
    if (message.seq != static_cast<int>(messages.size()))
        throw std::logic_error("transcript seq must be gapless: expected " +
                               std::to_string(messages.size()) + ", got " +
                               std::to_string(message.seq));
    if (!messages.empty() &&
        static_cast<int>(message.phase) < static_cast<int>(messages.back().phase))
        throw std::logic_error("transcript phase must be non-decreasing");
    if (message.content.empty())
        throw std::logic_error("transcript message content must be non-empty");
    messages.push_back(std::move(message));
}

}  // namespace malea
