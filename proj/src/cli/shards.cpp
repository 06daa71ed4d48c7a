#include "cohort/cli.hpp"

#include "cohort/errors.hpp"

#include <glob.h>

#include <algorithm>
#include <charconv>

namespace cohort::cli {

std::vector<std::filesystem::path> expand_shards(const std::string& expr) {
  if (expr.empty()) throw DataError("empty shard expression");

  const auto slash = expr.find_last_of('/');
  const std::string tail = slash == std::string::npos ? expr : expr.substr(slash + 1);
  const bool numeric = !tail.empty() && std::all_of(tail.begin(), tail.end(), [](char c) { return c >= '0' && c <= '9'; });
  if (numeric && slash != std::string::npos) {
    std::size_t n = 0;
    auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), n);
    if (ec != std::errc{} || ptr != tail.data() + tail.size()) throw DataError("shard count out of range in '" + expr + "'");
    if (n == 0) throw DataError("shard expression '" + expr + "' expands to zero shards");
    const std::filesystem::path folder = expr.substr(0, slash);
    std::vector<std::filesystem::path> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(folder / std::to_string(i));
    return out;
  }

  glob_t g{};
  const int rc = ::glob(expr.c_str(), GLOB_ERR, nullptr, &g);
  std::vector<std::filesystem::path> out;
  if (rc == 0) {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  }
  globfree(&g);
  if (rc == GLOB_NOMATCH || out.empty()) throw DataError("shard expression '" + expr + "' matched no files");
  if (rc != 0) throw DataError("cannot expand shard expression '" + expr + "'");
  std::sort(out.begin(), out.end());
  return out;
}

std::filesystem::path resolve_shard_file(const std::filesystem::path& shard) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(shard, ec)) return shard;
  for (const char* ext : {".parquet", ".csv"}) {
    std::filesystem::path p = shard;
    p += ext;
    if (std::filesystem::is_regular_file(p, ec)) return p;
  }
  throw DataError("shard '" + shard.string() + "' does not exist (also tried .parquet and .csv)");
}

}  // namespace cohort::cli
