#include "malea/eval.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

namespace malea {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

}  // namespace

MetricsReport compute_metrics(const std::vector<MappingRecord>& mapping,
                              const std::vector<GoldRequirement>& gold) {
    MetricsReport r;
    r.prod = static_cast<int>(mapping.size());
    std::set<std::string> covered;
    for (const auto& m : mapping) {
        if (m.gold_id) {
            ++r.tp;
            covered.insert(*m.gold_id);
        } else {
            if (!m.shared.value_or(false)) {
                ++r.unique_count;
                if (m.relevant.value_or(false)) ++r.unique_relevant;
            }
        }
    }
    r.fp = r.prod - r.tp;
    r.tp_a = static_cast<int>(covered.size());
    r.fn_a = static_cast<int>(gold.size()) - r.tp_a;
    if (r.prod > 0) r.precision = static_cast<double>(r.tp) / r.prod;
    if (!gold.empty()) r.recall = static_cast<double>(r.tp_a) / (r.tp_a + r.fn_a);
    return r;
}

AggregateReport aggregate(const std::vector<MetricsReport>& reports) {
    if (reports.empty()) throw EvalError("aggregate requires at least one report");
    AggregateReport a;
    for (const auto& r : reports) {
        a.prod += r.prod;
        a.tp += r.tp;
        a.fp += r.fp;
        a.tp_a += r.tp_a;
        a.fn_a += r.fn_a;
        a.unique_count += r.unique_count;
        a.unique_relevant += r.unique_relevant;
    }
    if (a.prod > 0) a.pooled_precision = static_cast<double>(a.tp) / a.prod;
    if (a.tp + a.fn_a > 0)
        a.aggregate_recall = static_cast<double>(a.tp) / (a.tp + a.fn_a);
    return a;
}

TopicLexicon TopicLexicon::default_lexicon() {
    return TopicLexicon{{
        {"internal transparency", {"maintainer", "internal", "source code", "development team"}},
        {"external transparency", {"inform the user", "disclose", "transparent", "notify users", "indicate"}},
        {"explainability", {"explain", "explanation", "interpretab", "why", "confidence"}},
        {"communication", {"communicat", "feedback", "report a problem", "contact", "appeal"}},
        {"documentation", {"document", "documented", "documentation"}},
        {"traceability", {"log", "trace", "audit", "record of"}},
        {"system reliability", {"accuracy", "reliab", "uptime", "respond within", "precision", "recall", "error handling"}},
        {"accessibility", {"accessib", "wcag", "screen reader", "disabilit"}},
        {"inclusion", {"inclusi", "diverse", "dialect", "gender", "age group", "bias", "fairness"}},
        {"privacy", {"privacy", "consent", "anonym", "encrypt", "personal data", "retention"}},
        {"data quality", {"data quality", "representative", "training data", "labeled", "validated"}},
        {"access to data", {"access to data", "data access", "export my data", "delete my data", "access control"}},
    }};
}

ThemeCoverage theme_coverage(const std::vector<DiscreteRequirement>& requirements,
                             const std::vector<EthicsTheme>& taxonomy,
                             const TopicLexicon& lexicon) {
    ThemeCoverage coverage;
    for (const auto& theme : taxonomy)
        for (const auto& topic : theme.topics) coverage.topic_hits[topic] = 0;

    for (const auto& req : requirements) {
        std::string text = lower(req.text);
        bool classified = false;
        for (auto& [topic, hits] : coverage.topic_hits) {
            auto it = lexicon.keywords.find(topic);
            if (it == lexicon.keywords.end()) continue;
            bool hit = std::any_of(it->second.begin(), it->second.end(),
                                   [&](const std::string& kw) {
                                       return text.find(lower(kw)) != std::string::npos;
                                   });
            if (hit) {
                ++hits;
                classified = true;
            }
        }
        if (!classified) ++coverage.unclassified;
    }
    for (const auto& [topic, hits] : coverage.topic_hits)
        if (hits == 0) coverage.uncovered_topics.push_back(topic);
    return coverage;
}

std::vector<std::string> validate_mapping(
    const std::vector<MappingRecord>& mapping,
    const std::vector<GoldRequirement>& gold,
    const std::vector<DiscreteRequirement>& requirements) {
    std::vector<std::string> findings;

    std::set<std::string> gold_ids;
    for (const auto& g : gold) {
        if (!gold_ids.insert(g.id).second)
            findings.push_back("duplicate gold id: " + g.id);
    }
    std::set<std::string> req_ids;
    for (const auto& r : requirements) req_ids.insert(r.id);

    std::set<std::string> seen_gen;
    for (const auto& m : mapping) {
        if (!seen_gen.insert(m.gen_id).second)
            findings.push_back("duplicate gen_id: " + m.gen_id);
        if (m.gold_id && !gold_ids.count(*m.gold_id))
            findings.push_back("mapping " + m.gen_id + " references unknown gold id " +
                               *m.gold_id);
        if (!m.gold_id && !m.relevant.has_value())
            findings.push_back("unmapped record " + m.gen_id +
                               " is missing a relevance judgement");
        if (!requirements.empty() && !req_ids.count(m.gen_id))
            findings.push_back("mapping references unknown requirement id " + m.gen_id);
    }
    return findings;
}

namespace {

nlohmann::json read_header(std::ifstream& in, const std::string& expected,
                           const std::string& path) {
    std::string line;
    if (!std::getline(in, line)) throw EvalError("empty file: " + path);
    try {
        auto header = nlohmann::json::parse(line);
        if (header.value("schema", "") != expected)
            throw EvalError("expected schema " + expected + " in " + path);
        return header;
    } catch (const nlohmann::json::exception& e) {
        throw EvalError("bad header in " + path + ": " + e.what());
    }
}

}  // namespace

std::vector<GoldRequirement> load_gold(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw EvalError("cannot open gold file: " + path.string());
    read_header(in, "malea/gold@1", path.string());
    std::vector<GoldRequirement> out;
    std::string line;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            out.push_back({j.at("id").get<std::string>(),
                           j.at("text").get<std::string>(),
                           j.value("topic", "")});
        } catch (const nlohmann::json::exception& e) {
            throw EvalError("gold line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::vector<MappingRecord> load_mapping(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw EvalError("cannot open mapping file: " + path.string());
    read_header(in, "malea/mapping@1", path.string());
    std::vector<MappingRecord> out;
    std::string line;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            MappingRecord m;
            m.gen_id = j.at("gen_id").get<std::string>();
            if (j.contains("gold_id") && !j["gold_id"].is_null())
                m.gold_id = j["gold_id"].get<std::string>();
            if (j.contains("relevant") && !j["relevant"].is_null())
                m.relevant = j["relevant"].get<bool>();
            if (j.contains("shared") && !j["shared"].is_null())
                m.shared = j["shared"].get<bool>();
            out.push_back(std::move(m));
        } catch (const nlohmann::json::exception& e) {
            throw EvalError("mapping line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

void write_gold(const std::filesystem::path& path,
                const std::vector<GoldRequirement>& gold) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw EvalError("cannot write gold file: " + path.string());
    out << nlohmann::json{{"schema", "malea/gold@1"}}.dump() << "\n";
    for (const auto& g : gold)
        out << nlohmann::json{{"id", g.id}, {"text", g.text}, {"topic", g.topic}}.dump()
            << "\n";
}

void write_mapping(const std::filesystem::path& path,
                   const std::vector<MappingRecord>& mapping) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw EvalError("cannot write mapping file: " + path.string());
    out << nlohmann::json{{"schema", "malea/mapping@1"}}.dump() << "\n";
    for (const auto& m : mapping) {
        nlohmann::json j{{"gen_id", m.gen_id}};
        if (m.gold_id) j["gold_id"] = *m.gold_id;
        if (m.relevant) j["relevant"] = *m.relevant;
        if (m.shared) j["shared"] = *m.shared;
        out << j.dump() << "\n";
    }
}

namespace {

std::string pct(const std::optional<double>& value) {
    if (!value) return "-";
    std::ostringstream out;
    out << std::fixed << std::setprecision(1) << (*value * 100.0) << " %";
    return out.str();
}

}  // namespace

std::string format_metrics_table(const std::vector<MetricsReport>& rows) {
    std::ostringstream out;
    out << std::left << std::setw(24) << "Set" << std::right << std::setw(6) << "Prod."
        << std::setw(5) << "TP" << std::setw(5) << "FP" << std::setw(6) << "TP_A"
        << std::setw(6) << "FN_A" << std::setw(9) << "Prec." << std::setw(9)
        << "Recall" << std::setw(8) << "Unique" << std::setw(12) << "Uniq.rel."
        << "\n";
    for (const auto& r : rows) {
        out << std::left << std::setw(24) << r.label << std::right << std::setw(6)
            << r.prod << std::setw(5) << r.tp << std::setw(5) << r.fp << std::setw(6)
            << r.tp_a << std::setw(6) << r.fn_a << std::setw(9) << pct(r.precision)
            << std::setw(9) << pct(r.recall) << std::setw(8) << r.unique_count
            << std::setw(12) << r.unique_relevant << "\n";
    }
    out << "Key: Prod. = requirements produced; TP/FP = mapped/unmapped records; "
           "TP_A = distinct gold requirements covered; FN_A = gold requirements "
           "missed; Recall = TP_A/(TP_A+FN_A) per case.\n";
    return out.str();
}

std::string format_aggregate(const AggregateReport& report) {
    std::ostringstream out;
    out << "Pooled over " << "cases: prod " << report.prod << ", tp " << report.tp
        << ", fp " << report.fp << ", tp_a " << report.tp_a << ", fn_a "
        << report.fn_a << "\n";
    out << "Pooled precision (sum tp / sum prod): " << pct(report.pooled_precision)
        << "\n";
    out << "Aggregate recall (sum tp / (sum tp + sum fn_a)): "
        << pct(report.aggregate_recall) << "\n";
    return out.str();
}

std::string metrics_to_json(const MetricsReport& report) {
    nlohmann::json j{
        {"label", report.label},
        {"prod", report.prod},
        {"tp", report.tp},
        {"fp", report.fp},
        {"tp_a", report.tp_a},
        {"fn_a", report.fn_a},
        {"unique", report.unique_count},
        {"unique_relevant", report.unique_relevant},
        {"recall_formula", "tp_a/(tp_a+fn_a)"},
    };
    j["precision"] = report.precision ? nlohmann::json(*report.precision)
                                      : nlohmann::json(nullptr);
    j["recall"] =
        report.recall ? nlohmann::json(*report.recall) : nlohmann::json(nullptr);
    return j.dump();
}

}  // namespace malea
