#pragma once

// Minimal typed columnar tables with CSV and Parquet backends.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cohort::io {

enum class ColumnType { int64, int8, boolean, float64, string, timestamp };

/// int64/int8/boolean/timestamp values live in `ints` (timestamps as UTC
/// microseconds), float64 in `reals`, string in `strings`. `valid` is either
/// empty (no nulls) or one flag per row.
struct Column {
  std::string name;
  ColumnType type = ColumnType::int64;
  std::vector<std::int64_t> ints;
  std::vector<double> reals;
  std::vector<std::string> strings;
  std::vector<std::uint8_t> valid;

  std::size_t size() const noexcept;
  bool is_valid(std::size_t row) const noexcept { return valid.empty() || valid[row] != 0; }
};

struct Table {
  std::vector<Column> columns;
  std::vector<std::string> file_columns;  // every column present in the source file

  std::size_t rows() const noexcept { return columns.empty() ? 0 : columns.front().size(); }
  const Column* find(std::string_view name) const;
  Column* find(std::string_view name) {
    return const_cast<Column*>(static_cast<const Table&>(*this).find(name));
  }
};

struct ColumnRequest {
  std::string name;
  ColumnType type;
  bool required = true;
};

enum class TableFormat { csv, parquet };

TableFormat format_for(const std::filesystem::path& path);
bool parquet_supported() noexcept;

/// Reads the requested columns, in request order; absent optional columns are
/// skipped. Missing required columns and unconvertible values are DataErrors.
Table read_table(const std::filesystem::path& path, std::span<const ColumnRequest> requests);

void write_table(const std::filesystem::path& path, const Table& table);

namespace detail {
Table read_csv(const std::filesystem::path& path, std::span<const ColumnRequest> requests);
void write_csv(const std::filesystem::path& path, const Table& table);
Table read_parquet(const std::filesystem::path& path, std::span<const ColumnRequest> requests);
void write_parquet(const std::filesystem::path& path, const Table& table);
}  // namespace detail

}  // namespace cohort::io
