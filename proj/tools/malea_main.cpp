#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "malea/eval.hpp"
#include "malea/linter.hpp"
#include "malea/model.hpp"
#include "malea/orchestrator.hpp"
#include "malea/persona.hpp"
#include "malea/provider.hpp"
#include "malea/session_io.hpp"
#include "malea/story_codec.hpp"

namespace {

// Exit codes, documented in the README.
constexpr int kExitOk = 0;             // session fully approved / command succeeded
constexpr int kExitCycleLimit = 1;     // session succeeded via a cycle limit
constexpr int kExitConfigError = 2;
constexpr int kExitProviderError = 3;
constexpr int kExitParseFailure = 4;
constexpr int kExitFindings = 5;       // lint violations / mapping validation findings

using namespace malea;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct RunFlags {
    std::string description_file;
    std::string config_file;
    std::string output_dir = "malea-out";
    std::string replay_cassette;
    std::string record_cassette;
    bool baseline = false;
    bool force = false;
    std::int64_t seed = -1;
    int max_cycles = -1;
};

RunConfig load_run_config(const RunFlags& flags) {
    RunConfig config;
    if (!flags.config_file.empty()) config = RunConfig::from_file(flags.config_file);
    if (flags.seed >= 0) config.seed = flags.seed;
    if (flags.max_cycles >= 0) config.max_critique_cycles = flags.max_cycles;
    config.validate();
    return config;
}

int session_exit_code(const SessionResult& result) {
    switch (result.status) {
        case SessionStatus::ProviderFailure: return kExitProviderError;
        case SessionStatus::ParseFailure: return kExitParseFailure;
        case SessionStatus::Ok: break;
    }
    bool cycle_limited =
        result.qa_termination == TerminationCause::CycleLimit ||
        result.ea_termination == TerminationCause::CycleLimit;
    return cycle_limited ? kExitCycleLimit : kExitOk;
}

void print_session_summary(const SessionResult& result) {
    auto termination = [](const std::optional<TerminationCause>& t) {
        return t ? to_string(*t) : std::string("n/a");
    };
    int placeholders = 0;
    for (const auto& s : result.stories)
        for (const auto& c : s.criteria)
            placeholders += static_cast<int>(c.placeholders.size());
    std::cout << "status: " << to_string(result.status) << "\n"
              << "provider calls: " << result.provider_calls << "\n"
              << "quality review: " << termination(result.qa_termination) << " ("
              << result.qa_critiques_used << " critiques)\n"
              << "ethics review: " << termination(result.ea_termination) << " ("
              << result.ea_critiques_used << " critiques)\n"
              << "stories: " << result.stories.size() << "\n"
              << "placeholders awaiting human review: " << placeholders << "\n";
    if (!result.error_detail.empty())
        std::cout << "error: " << result.error_detail << "\n";
}

int cmd_run(const RunFlags& flags) {
    RunConfig config = load_run_config(flags);
    SystemDescription description = SystemDescription::from_file(flags.description_file);

    std::shared_ptr<Provider> provider;
    SessionOptions options;
    options.session_id = std::filesystem::path(flags.description_file).stem().string();
    if (!flags.replay_cassette.empty()) {
        provider = std::make_shared<ReplayProvider>(flags.replay_cassette);
        options.clock = fixed_clock();
    } else {
        if (config.provider_endpoint.empty())
            throw ConfigError("missing config key: provider_endpoint "
                              "(required for live runs; use --replay for offline runs)");
        provider = std::make_shared<RetryingProvider>(
            std::make_shared<HttpChatProvider>(config.provider_endpoint));
    }
    if (!flags.record_cassette.empty())
        provider = std::make_shared<RecordingProvider>(provider, flags.record_cassette);

    SessionResult result = flags.baseline
                               ? run_baseline(config, description, *provider, options)
                               : run_session(config, description, *provider, options);

    write_session_artifacts(flags.output_dir, result, flags.force);
    print_session_summary(result);
    std::cout << "artifacts written to " << flags.output_dir << "\n";
    return session_exit_code(result);
}

int cmd_eval(const std::vector<std::string>& files, bool aggregate_flag, bool force) {
    if (files.empty() || files.size() % 3 != 0)
        throw ConfigError("eval expects file triples: <gold> <mapping> <requirements>");

    std::vector<MetricsReport> rows;
    for (std::size_t i = 0; i < files.size(); i += 3) {
        auto gold = load_gold(files[i]);
        auto mapping = load_mapping(files[i + 1]);
        auto requirements = load_requirements_export(files[i + 2]);

        auto findings = validate_mapping(mapping, gold, requirements);
        if (!findings.empty() && !force) {
            std::cerr << "mapping validation failed for " << files[i + 1] << ":\n";
            for (const auto& f : findings) std::cerr << "  - " << f << "\n";
            return kExitFindings;
        }
        MetricsReport report = compute_metrics(mapping, gold);
        report.label = std::filesystem::path(files[i + 1]).stem().string();
        rows.push_back(report);
    }

    std::cout << format_metrics_table(rows);
    if (aggregate_flag) std::cout << "\n" << format_aggregate(aggregate(rows));
    return kExitOk;
}

int cmd_lint(const std::vector<std::string>& files, const std::string& lexicon_file,
             bool strict) {
    Lexicon lexicon = lexicon_file.empty() ? Lexicon::default_lexicon()
                                           : Lexicon::load(lexicon_file);
    int total = 0;
    for (const auto& file : files) {
        ParseResult parsed = parse_stories(read_file(file));
        LintReport report = lint_report(parsed.stories, lexicon);
        std::cout << file << ": " << parsed.stories.size() << " stories, "
                  << report.violations.size() << " violations\n";
        for (const auto& [criterion, count] : report.totals)
            std::cout << "  " << to_string(criterion) << ": " << count << "\n";
        for (const auto& v : report.violations)
            std::cout << "  " << v.story_id << " [" << to_string(v.criterion)
                      << "] " << v.rationale << "\n";
        total += static_cast<int>(report.violations.size());
        if (!parsed.residue.empty())
            std::cout << "  residue lines: " << parsed.residue.size() << "\n";
    }
    return (strict && total > 0) ? kExitFindings : kExitOk;
}

int cmd_decompose(const std::string& file, const std::string& output) {
    ParseResult parsed = parse_stories(read_file(file));
    std::vector<DiscreteRequirement> requirements;
    for (const auto& story : parsed.stories) {
        auto reqs = decompose(story, DecomposeMode::Rule);
        requirements.insert(requirements.end(), reqs.begin(), reqs.end());
    }
    if (output.empty()) {
        for (const auto& r : requirements)
            std::cout << r.id << "\t" << r.text << "\n";
    } else {
        write_requirements_export(output, parsed.stories, requirements);
        std::cout << requirements.size() << " requirements written to " << output
                  << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MALEA: multi-agent LLM drafting of ethics requirements"};
    app.require_subcommand(1);

    RunFlags run_flags;
    auto* run = app.add_subcommand("run", "Run a drafting session on a description");
    run->add_option("description", run_flags.description_file, "System description file")
        ->required();
    run->add_option("--config", run_flags.config_file, "Run config JSON file");
    run->add_option("--output", run_flags.output_dir, "Artifact output directory");
    run->add_flag("--baseline", run_flags.baseline, "Single-call baseline mode");
    run->add_option("--replay", run_flags.replay_cassette, "Replay from a cassette");
    run->add_option("--record", run_flags.record_cassette, "Record a cassette");
    run->add_option("--seed", run_flags.seed, "Override config seed");
    run->add_option("--max-cycles", run_flags.max_cycles,
                    "Override max critique cycles");
    run->add_flag("--force", run_flags.force, "Overwrite a non-empty output dir");

    std::vector<std::string> eval_files;
    bool eval_aggregate = false, eval_force = false;
    auto* eval = app.add_subcommand("eval", "Score mappings against a gold set");
    eval->add_option("files", eval_files,
                     "Triples: <gold.jsonl> <mapping.jsonl> <requirements.jsonl>")
        ->required();
    eval->add_flag("--aggregate", eval_aggregate, "Also print pooled figures");
    eval->add_flag("--force", eval_force, "Proceed despite validation findings");

    std::vector<std::string> lint_files;
    std::string lint_lexicon;
    bool lint_strict = false;
    auto* lint = app.add_subcommand("lint", "Quality-lint user-story files");
    lint->add_option("files", lint_files, "Story markdown files")->required();
    lint->add_option("--lexicon", lint_lexicon, "Vague-term lexicon file");
    lint->add_flag("--strict", lint_strict, "Exit nonzero on any violation");

    std::string decompose_file, decompose_output;
    auto* decompose_cmd =
        app.add_subcommand("decompose", "Split stories into discrete requirements");
    decompose_cmd->add_option("file", decompose_file, "Story markdown file")->required();
    decompose_cmd->add_option("--output", decompose_output,
                              "Requirements export path (default: stdout)");

    RunFlags replay_flags;
    auto* replay = app.add_subcommand("replay", "Re-run a session from a cassette");
    replay->add_option("cassette", replay_flags.replay_cassette, "Cassette file")
        ->required();
    replay->add_option("description", replay_flags.description_file,
                       "System description file")
        ->required();
    replay->add_option("--config", replay_flags.config_file, "Run config JSON file");
    replay->add_option("--output", replay_flags.output_dir, "Artifact output directory");
    replay->add_flag("--baseline", replay_flags.baseline, "Single-call baseline mode");
    replay->add_flag("--force", replay_flags.force, "Overwrite a non-empty output dir");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_flags);
        if (eval->parsed()) return cmd_eval(eval_files, eval_aggregate, eval_force);
        if (lint->parsed()) return cmd_lint(lint_files, lint_lexicon, lint_strict);
        if (decompose_cmd->parsed()) return cmd_decompose(decompose_file, decompose_output);
        if (replay->parsed()) return cmd_run(replay_flags);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const ProviderError& e) {
        std::cerr << "provider error: " << e.what() << "\n";
        return kExitProviderError;
    } catch (const EvalError& e) {
        std::cerr << "eval error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const CodecError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParseFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
    return kExitOk;
}
