#include "cohort/cli.hpp"

#include "cohort/engine.hpp"
#include "cohort/errors.hpp"
#include "cohort/output.hpp"
#include "manifest_internal.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <set>
#include <thread>

namespace cohort::cli {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void configure_logging(const std::string& requested) {
  std::string level = requested;
  if (const char* env = std::getenv("COHORT_FORGE_LOG"); env && *env) level = env;
  auto logger = spdlog::get("cohort");
  if (!logger) {
    logger = spdlog::stderr_color_mt("cohort");
    logger->set_pattern("[%l] %v");
  }
  spdlog::set_default_logger(logger);
  const auto parsed = spdlog::level::from_str(level);
  // from_str maps unknown names to off; only accept that for an explicit "off".
  if (parsed == spdlog::level::off && level != "off") {
    spdlog::set_level(spdlog::level::info);
    spdlog::warn("unknown log level '{}', using info", level);
  } else {
    spdlog::set_level(parsed);
  }
}

struct Job {
  std::filesystem::path input;
  std::filesystem::path output;
};

detail::InputRecord run_job(const Job& job, const RunOptions& options, const TaskConfig& config, unsigned threads) {
  const auto t0 = Clock::now();
  const CohortSource source = load_source(job.input, options.standard, config);
  ExtractOptions eo;
  eo.include_window_stats = options.include_window_stats;
  eo.threads = threads;
  const auto rows = extract_cohort(source, config, eo);
  write_cohort(job.output, rows, config, options.include_window_stats);
  spdlog::info("{}: {} subjects, {} cohort rows -> {}", job.input.string(), source.timelines.size(), rows.size(),
               job.output.string());
  detail::InputRecord rec;
  rec.input = job.input;
  rec.output = job.output;
  rec.input_rows = source.stats.input_rows;
  rec.null_time_rows = source.stats.null_time_rows;
  rec.subjects = source.timelines.size();
  rec.rows = rows.size();
  rec.seconds = seconds_since(t0);
  return rec;
}

std::vector<Job> plan_shards(const RunOptions& options) {
  std::string expr = *options.shards;
  if (options.data_path && !std::filesystem::path(expr).is_absolute()) {
    expr = (*options.data_path / expr).string();
  }
  std::vector<Job> jobs;
  std::set<std::string> stems;
  for (const auto& shard : expand_shards(expr)) {
    const auto file = resolve_shard_file(shard);
    const std::string ext = io::format_for(file) == io::TableFormat::parquet ? ".parquet" : ".csv";
    const std::string stem = file.stem().string();
    if (!stems.insert(stem).second) {
      throw DataError("two shards share the output name '" + stem + ext + "'");
    }
    jobs.push_back({file, options.output_path / (stem + ext)});
  }
  return jobs;
}

// Bounded pool over shards; results land in shard order whatever finishes first.
std::vector<detail::InputRecord> run_shards(const std::vector<Job>& jobs, const RunOptions& options,
                                            const TaskConfig& config) {
  std::vector<detail::InputRecord> records(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        records[i] = run_job(jobs[i], options, config, 1);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::min<std::size_t>(std::max(1u, options.jobs), jobs.size());
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return records;
}

RunOptions absolutized(RunOptions o) {
  o.config_path = std::filesystem::absolute(o.config_path);
  if (o.data_path) o.data_path = std::filesystem::absolute(*o.data_path);
  o.output_path = std::filesystem::absolute(o.output_path);
  return o;
}

int execute(const RunOptions& raw) {
  const auto t0 = Clock::now();
  const RunOptions options = absolutized(raw);
  const TaskConfig config = load_task_config(options.config_path);
  spdlog::debug("config {} parsed: {} predicates, {} windows", options.config_path.string(), config.predicates.size(),
                config.windows.size());

  detail::RunRecord record;
  record.options = options;
  record.config_hash = config_hash(config);
  if (options.shards) {
    record.inputs = run_shards(plan_shards(options), options, config);
  } else {
    if (!options.data_path) throw ConfigError("--data is required unless --shards is given");
    record.inputs.push_back(run_job({*options.data_path, options.output_path}, options, config, options.jobs));
  }
  record.wall_seconds = seconds_since(t0);
  detail::write_manifest(manifest_path(options), record);
  return ok;
}

}  // namespace

int run(const RunOptions& options) {
  configure_logging(options.log_level);
  try {
    return execute(options);
  } catch (const ConfigError& e) {
    spdlog::error("config error: {}", e.what());
    return config_error;
  } catch (const DataError& e) {
    spdlog::error("data error: {}", e.what());
    return data_error;
  } catch (const std::overflow_error& e) {
    spdlog::error("data error: {}", e.what());
    return data_error;
  } catch (const std::filesystem::filesystem_error& e) {
    spdlog::error("data error: {}", e.what());
    return data_error;
  } catch (const std::exception& e) {
    spdlog::error("internal error: {}", e.what());
    return internal_error;
  }
}

int run_from_manifest(const std::filesystem::path& manifest, const std::string& log_level) {
  configure_logging(log_level);
  RunOptions options;
  try {
    options = detail::read_manifest(manifest);
  } catch (const ConfigError& e) {
    spdlog::error("config error: {}", e.what());
    return config_error;
  }
  options.log_level = log_level;
  return run(options);
}

}  // namespace cohort::cli
