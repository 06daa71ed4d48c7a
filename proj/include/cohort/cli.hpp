#pragma once

// Batch extraction driver behind the cohort-extract tool.

#include "cohort/events.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cohort::cli {

enum ExitCode : int { ok = 0, config_error = 1, data_error = 2, internal_error = 3 };

struct RunOptions {
  std::filesystem::path config_path;
  std::optional<std::filesystem::path> data_path;  // single mode, or the root for relative shard expressions
  DataStandard standard = DataStandard::meds;
  std::filesystem::path output_path;  // file in single mode, directory in shard mode
  std::optional<std::string> shards;
  unsigned jobs = 1;
  bool include_window_stats = false;
  std::string log_level = "info";
};

/// `<folder>/<num>` becomes `<folder>/0 .. <folder>/<num-1>`; anything else is
/// a glob, expanded in lexicographic order. No match is a DataError.
std::vector<std::filesystem::path> expand_shards(const std::string& expr);

/// A shard path as listed, or with `.parquet` / `.csv` appended when the bare
/// path does not exist.
std::filesystem::path resolve_shard_file(const std::filesystem::path& shard);

/// Runs one extraction and writes outputs plus the run manifest. Errors are
/// logged to standard error and mapped to exit codes, never thrown.
int run(const RunOptions& options);

/// Re-executes the run recorded in a manifest file.
int run_from_manifest(const std::filesystem::path& manifest, const std::string& log_level = "info");

/// `<output>.manifest.json` in single mode, `<output_dir>/manifest.json` for shards.
std::filesystem::path manifest_path(const RunOptions& options);

}  // namespace cohort::cli
