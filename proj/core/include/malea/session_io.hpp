#pragma once

#include <filesystem>
#include <string>

#include "malea/orchestrator.hpp"

namespace malea {

/// Transcript file: JSONL, one Message per line after a schema header.
void save_transcript(const std::filesystem::path& path, const Transcript& transcript);
Transcript load_transcript(const std::filesystem::path& path);

/// Session manifest: config snapshot, status, termination summary, call and
/// placeholder counts.
std::string manifest_json(const SessionResult& result);

/// Output tree (versioned layout v1):
///   final_document.md, requirements.jsonl, transcript.jsonl, manifest.json
/// Refuses to overwrite an existing directory unless force is set.
void write_session_artifacts(const std::filesystem::path& dir,
                             const SessionResult& result, bool force);

}  // namespace malea
