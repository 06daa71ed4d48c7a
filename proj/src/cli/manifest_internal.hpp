#pragma once

#include "cohort/cli.hpp"
#include "cohort/config.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace cohort::cli::detail {

struct InputRecord {
  std::filesystem::path input;
  std::filesystem::path output;
  std::size_t input_rows = 0;
  std::size_t null_time_rows = 0;
  std::size_t subjects = 0;
  std::size_t rows = 0;
  double seconds = 0.0;
};

struct RunRecord {
  RunOptions options;  // paths made absolute
  std::string config_hash;
  std::vector<InputRecord> inputs;
  double wall_seconds = 0.0;
};

void write_manifest(const std::filesystem::path& path, const RunRecord& record);
RunOptions read_manifest(const std::filesystem::path& path);

}  // namespace cohort::cli::detail
