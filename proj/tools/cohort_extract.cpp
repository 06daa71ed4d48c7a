// cohort-extract: extract a labeled cohort table from an event stream.

#include "cohort/cli.hpp"

#include <CLI11.hpp>

int main(int argc, char** argv) {
  CLI::App app{"Extract a labeled cohort from MEDS-like event data or direct predicates.", "cohort-extract"};
  app.set_version_flag("--version", std::string(COHORT_FORGE_VERSION));

  cohort::cli::RunOptions options;
  std::string config;
  std::string data;
  std::string standard = "meds";
  std::string output;
  std::string shards;
  std::string manifest;

  app.add_option("--config", config, "Task configuration file (YAML)");
  app.add_option("--data", data, "Event file; with --shards, the directory shard expressions are relative to");
  app.add_option("--standard", standard, "Input data standard")
      ->check(CLI::IsMember({"meds", "direct"}))
      ->capture_default_str();
  app.add_option("--output", output, "Output table, or output directory with --shards");
  app.add_option("--shards", shards, "Shard glob or <folder>/<num> expression");
  app.add_option("--jobs", options.jobs, "Worker count")->check(CLI::Range(1u, 1024u))->capture_default_str();
  app.add_flag("--include-window-stats", options.include_window_stats,
               "Add per-window boundaries, predicate counts and truncation flags");
  app.add_option("--log-level", options.log_level, "trace, debug, info, warn, error or off (COHORT_FORGE_LOG overrides)")
      ->capture_default_str();
  app.add_option("--from-manifest", manifest, "Re-run the extraction recorded in a run manifest")
      ->excludes("--config", "--data", "--output", "--shards", "--standard", "--jobs", "--include-window-stats");

  try {
    app.parse(argc, argv);
    if (manifest.empty()) {
      if (config.empty()) throw CLI::RequiredError("--config");
      if (output.empty()) throw CLI::RequiredError("--output");
      if (data.empty() && shards.empty()) throw CLI::RequiredError("--data or --shards");
    }
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    // Usage problems are configuration errors; --help and --version exit 0.
    return rc == 0 ? 0 : cohort::cli::config_error;
  }

  if (!manifest.empty()) return cohort::cli::run_from_manifest(manifest, options.log_level);

  options.config_path = config;
  if (!data.empty()) options.data_path = data;
  options.standard = standard == "meds" ? cohort::DataStandard::meds : cohort::DataStandard::direct;
  options.output_path = output;
  if (!shards.empty()) options.shards = shards;
  return cohort::cli::run(options);
}
