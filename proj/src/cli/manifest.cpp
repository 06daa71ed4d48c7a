#include "manifest_internal.hpp"

#include "cohort/errors.hpp"
#include "cohort/simd/kernels.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace cohort::cli {

std::filesystem::path manifest_path(const RunOptions& options) {
  if (options.shards) return options.output_path / "manifest.json";
  std::filesystem::path p = options.output_path;
  p += ".manifest.json";
  return p;
}

namespace detail {

using nlohmann::ordered_json;

// Everything except the "timings" object is a pure function of the inputs.
void write_manifest(const std::filesystem::path& path, const RunRecord& record) {
  const RunOptions& o = record.options;
  ordered_json m;
  m["tool"] = "cohort-extract";
  m["engine_version"] = COHORT_FORGE_VERSION;
  m["kernels"] = std::string(simd::isa_name(simd::active().isa));
  m["config"] = {{"path", o.config_path.string()}, {"sha256", record.config_hash}};
  m["standard"] = o.standard == DataStandard::meds ? "meds" : "direct";
  m["mode"] = o.shards ? "shards" : "single";
  m["data"] = o.data_path ? ordered_json(o.data_path->string()) : ordered_json(nullptr);
  m["shards"] = o.shards ? ordered_json(*o.shards) : ordered_json(nullptr);
  m["output"] = o.output_path.string();
  m["jobs"] = o.jobs;
  m["include_window_stats"] = o.include_window_stats;

  ordered_json inputs = ordered_json::array();
  ordered_json per_input = ordered_json::array();
  std::size_t total = 0;
  for (const auto& in : record.inputs) {
    inputs.push_back({{"path", in.input.string()},
                      {"output", in.output.string()},
                      {"input_rows", in.input_rows},
                      {"null_time_rows", in.null_time_rows},
                      {"subjects", in.subjects},
                      {"rows", in.rows}});
    per_input.push_back({{"path", in.input.string()}, {"seconds", in.seconds}});
    total += in.rows;
  }
  m["inputs"] = std::move(inputs);
  m["total_rows"] = total;
  m["timings"] = {{"wall_seconds", record.wall_seconds}, {"inputs", std::move(per_input)}};

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write manifest '" + path.string() + "'");
  out << m.dump(2) << '\n';
}

RunOptions read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open manifest", 0, 0, path.string());
  ordered_json m;
  try {
    m = ordered_json::parse(in);
    RunOptions o;
    o.config_path = m.at("config").at("path").get<std::string>();
    const std::string standard = m.at("standard").get<std::string>();
    if (standard != "meds" && standard != "direct") throw ConfigError("unknown standard '" + standard + "'");
    o.standard = standard == "meds" ? DataStandard::meds : DataStandard::direct;
    if (!m.at("data").is_null()) o.data_path = m.at("data").get<std::string>();
    if (!m.at("shards").is_null()) o.shards = m.at("shards").get<std::string>();
    o.output_path = m.at("output").get<std::string>();
    o.jobs = m.at("jobs").get<unsigned>();
    o.include_window_stats = m.at("include_window_stats").get<bool>();
    return o;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what(), 0, 0, path.string());
  }
}

}  // namespace detail
}  // namespace cohort::cli
