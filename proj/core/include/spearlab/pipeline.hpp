#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "spearlab/config.hpp"

namespace spearlab::pipeline {

// Exit codes shared by the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitStageFailure = 3;
inline constexpr int kExitCheckFailure = 4;

struct StageResult {
  std::string name;
  bool ok = false;
  std::string detail;
  std::filesystem::path manifest;
};

struct ExitReport {
  std::vector<StageResult> stages;
  bool checks_ok = false;
  int exit_code = kExitOk;
};

struct RunOptions {
  int jobs = 1;
};

// Executes ingest -> segment -> variation -> infogain -> diversity ->
// detector train/eval -> ensemble -> stats against the paths named in the
// config. Every stage writes a manifest recording the content hashes of its
// inputs and outputs; manifests chain via the previous manifest's hash.
// Validates the config up front (ConfigInvalidError before any stage) and
// stops at the first failing stage. Deterministic: identical config and
// inputs produce byte-identical outputs.
ExitReport run_pipeline(const Config& config, const RunOptions& options = {});

/// Re-reads every manifest and re-hashes the files it names.
bool verify_manifest_chain(const std::filesystem::path& manifest_dir, std::string* error);

}  // namespace spearlab::pipeline
