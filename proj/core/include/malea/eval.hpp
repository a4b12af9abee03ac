#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "malea/model.hpp"

namespace malea {

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GoldRequirement {
    std::string id;
    std::string text;
    std::string topic;  // taxonomy topic label
};

struct MappingRecord {
    std::string gen_id;
    std::optional<std::string> gold_id;
    std::optional<bool> relevant;  // judged for unmapped records only
    std::optional<bool> shared;    // also produced by the comparison approach
};

struct MetricsReport {
    std::string label;
    int prod = 0;
    int tp = 0;
    int fp = 0;
    int tp_a = 0;
    int fn_a = 0;
    int unique_count = 0;
    int unique_relevant = 0;
    std::optional<double> precision;  // tp / prod; absent when prod = 0
    std::optional<double> recall;     // tp_a / (tp_a + fn_a); absent when gold empty
};

/// prod = |mapping|; tp = mapped records; tp_a = distinct gold ids covered;
/// unique = unmapped records with shared = false.
MetricsReport compute_metrics(const std::vector<MappingRecord>& mapping,
                              const std::vector<GoldRequirement>& gold);

struct AggregateReport {
    int prod = 0, tp = 0, fp = 0, tp_a = 0, fn_a = 0;
    int unique_count = 0, unique_relevant = 0;
    std::optional<double> pooled_precision;  // sum(tp) / sum(prod)
    /// Pooled recall over raw true positives: sum(tp) / (sum(tp) + sum(fn_a)).
    /// Differs from averaging the per-case tp_a-based recalls.
    std::optional<double> aggregate_recall;
};

AggregateReport aggregate(const std::vector<MetricsReport>& reports);

struct TopicLexicon {
    std::map<std::string, std::vector<std::string>> keywords;  // topic -> keywords

    static TopicLexicon default_lexicon();
};

struct ThemeCoverage {
    std::map<std::string, int> topic_hits;
    std::vector<std::string> uncovered_topics;
    int unclassified = 0;
};

ThemeCoverage theme_coverage(const std::vector<DiscreteRequirement>& requirements,
                             const std::vector<EthicsTheme>& taxonomy,
                             const TopicLexicon& lexicon = TopicLexicon::default_lexicon());

/// Check mapping invariants and referential integrity against the gold set
/// and requirements export. Returns findings; never throws on bad data.
std::vector<std::string> validate_mapping(
    const std::vector<MappingRecord>& mapping,
    const std::vector<GoldRequirement>& gold,
    const std::vector<DiscreteRequirement>& requirements);

// File formats: JSONL with a schema header line.
//   gold:    {"schema":"malea/gold@1"} then {"id","text","topic"}
//   mapping: {"schema":"malea/mapping@1"} then
//            {"gen_id","gold_id"?,"relevant"?,"shared"?}
std::vector<GoldRequirement> load_gold(const std::filesystem::path& path);
std::vector<MappingRecord> load_mapping(const std::filesystem::path& path);
void write_gold(const std::filesystem::path& path,
                const std::vector<GoldRequirement>& gold);
void write_mapping(const std::filesystem::path& path,
                   const std::vector<MappingRecord>& mapping);

/// Human-readable table mirroring a fixed evaluation layout;
/// percentages printed with one decimal place.
std::string format_metrics_table(const std::vector<MetricsReport>& rows);
std::string format_aggregate(const AggregateReport& report);

/// Machine-readable report record.
std::string metrics_to_json(const MetricsReport& report);

}  // namespace malea
