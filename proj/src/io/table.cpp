#include "cohort/table_io.hpp"
#include "cohort/errors.hpp"

namespace cohort::io {

std::size_t Column::size() const noexcept {
  switch (type) {
    case ColumnType::float64: return reals.size();
    case ColumnType::string: return strings.size();
    default: return ints.size();
  }
}

const Column* Table::find(std::string_view name) const {
  for (const auto& c : columns)
    if (c.name == name) return &c;
  return nullptr;
}

TableFormat format_for(const std::filesystem::path& path) {
  return path.extension() == ".parquet" ? TableFormat::parquet : TableFormat::csv;
}

bool parquet_supported() noexcept {
#ifdef COHORT_HAVE_PARQUET
  return true;
#else
  return false;
#endif
}

Table read_table(const std::filesystem::path& path, std::span<const ColumnRequest> requests) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw DataError("input file '" + path.string() + "' does not exist");
  }
  if (format_for(path) == TableFormat::parquet) return detail::read_parquet(path, requests);
  return detail::read_csv(path, requests);
}

void write_table(const std::filesystem::path& path, const Table& table) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (format_for(path) == TableFormat::parquet) {
    detail::write_parquet(path, table);
  } else {
    detail::write_csv(path, table);
  }
}

}  // namespace cohort::io
