#include "malea/session_io.hpp"

#include <fstream>

#include <json.hpp>

#include "malea/story_codec.hpp"

namespace malea {

namespace {

nlohmann::json message_to_json(const Message& m) {
    return {
        {"seq", m.seq},
        {"role", to_string(m.role)},
        {"phase", to_string(m.phase)},
        {"content", m.content},
        {"tokens_in", m.tokens_in},
        {"tokens_out", m.tokens_out},
        {"timestamp_ms", m.timestamp_ms},
    };
}

Message message_from_json(const nlohmann::json& j) {
    Message m;
    m.seq = j.at("seq").get<int>();
    m.role = role_from_string(j.at("role").get<std::string>());
    m.phase = phase_from_string(j.at("phase").get<std::string>());
    m.content = j.at("content").get<std::string>();
    m.tokens_in = j.at("tokens_in").get<int>();
    m.tokens_out = j.at("tokens_out").get<int>();
    m.timestamp_ms = j.at("timestamp_ms").get<std::int64_t>();
    return m;
}

}  // namespace

void save_transcript(const std::filesystem::path& path, const Transcript& transcript) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write transcript: " + path.string());
    out << nlohmann::json{{"schema", "malea/transcript@1"},
                          {"session_id", transcript.session_id}}
               .dump()
        << "\n";
    for (const auto& m : transcript.messages) out << message_to_json(m).dump() << "\n";
}

Transcript load_transcript(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open transcript: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty transcript: " + path.string());
    Transcript t;
    try {
        auto header = nlohmann::json::parse(line);
        if (header.value("schema", "") != "malea/transcript@1")
            throw ConfigError("unexpected transcript schema in " + path.string());
        t.session_id = header.value("session_id", "");
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            t.append(message_from_json(nlohmann::json::parse(line)));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad transcript line: " + std::string(e.what()));
    }
    return t;
}

std::string manifest_json(const SessionResult& result) {
    int placeholder_count = 0;
    for (const auto& story : result.stories)
        for (const auto& c : story.criteria)
            placeholder_count += static_cast<int>(c.placeholders.size());

    nlohmann::json j{
        {"schema", "malea/manifest@1"},
        {"session_id", result.transcript.session_id},
        {"status", to_string(result.status)},
        {"provider_calls", result.provider_calls},
        {"qa_critiques_used", result.qa_critiques_used},
        {"ea_critiques_used", result.ea_critiques_used},
        {"stories", result.stories.size()},
        {"placeholders", placeholder_count},
        {"config", nlohmann::json::parse(result.transcript.config_snapshot.to_json_text())},
    };
    j["qa_termination"] = result.qa_termination
                              ? nlohmann::json(to_string(*result.qa_termination))
                              : nlohmann::json(nullptr);
    j["ea_termination"] = result.ea_termination
                              ? nlohmann::json(to_string(*result.ea_termination))
                              : nlohmann::json(nullptr);
    if (!result.error_detail.empty()) j["error_detail"] = result.error_detail;
    return j.dump(2) + "\n";
}

void write_session_artifacts(const std::filesystem::path& dir,
                             const SessionResult& result, bool force) {
    namespace fs = std::filesystem;
    if (fs::exists(dir) && !fs::is_empty(dir) && !force)
        throw ConfigError("output directory " + dir.string() +
                          " is not empty; pass --force to overwrite");
    fs::create_directories(dir);

    {
        std::ofstream out(dir / "final_document.md", std::ios::trunc);
        out << result.final_document;
    }
    save_transcript(dir / "transcript.jsonl", result.transcript);
    {
        std::ofstream out(dir / "manifest.json", std::ios::trunc);
        out << manifest_json(result);
    }

    std::vector<DiscreteRequirement> requirements;
    for (const auto& story : result.stories) {
        auto reqs = decompose(story, DecomposeMode::Rule);
        requirements.insert(requirements.end(), reqs.begin(), reqs.end());
    }
    write_requirements_export(dir / "requirements.jsonl", result.stories, requirements);
}

}  // namespace malea
