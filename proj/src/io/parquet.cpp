#include "cohort/errors.hpp"
#include "cohort/table_io.hpp"

#ifdef COHORT_HAVE_PARQUET
#include <arrow/api.h>
#include <arrow/io/api.h>
#include <parquet/arrow/reader.h>
#include <parquet/arrow/writer.h>
#include <parquet/properties.h>
#endif

namespace cohort::io::detail {

#ifndef COHORT_HAVE_PARQUET

Table read_parquet(const std::filesystem::path& path, std::span<const ColumnRequest>) {
  throw DataError("cannot read '" + path.string() + "': built without Parquet support, use CSV");
}

void write_parquet(const std::filesystem::path& path, const Table&) {
  throw DataError("cannot write '" + path.string() + "': built without Parquet support, use CSV");
}

#else

namespace {

template <class T>
T unwrap(arrow::Result<T> result, const std::filesystem::path& path) {
  if (!result.ok()) throw DataError("'" + path.string() + "': " + result.status().ToString());
  return std::move(result).ValueOrDie();
}

void check(const arrow::Status& status, const std::filesystem::path& path) {
  if (!status.ok()) throw DataError("'" + path.string() + "': " + status.ToString());
}

std::int64_t micros_per_unit(arrow::TimeUnit::type unit, std::int64_t& divisor) {
  divisor = 1;
  switch (unit) {
    case arrow::TimeUnit::SECOND: return 1'000'000;
    case arrow::TimeUnit::MILLI: return 1'000;
    case arrow::TimeUnit::MICRO: return 1;
    case arrow::TimeUnit::NANO: divisor = 1'000; return 1;
  }
  return 1;
}

void mark_null(Column& col, std::size_t row_count_before) {
  if (col.valid.empty()) col.valid.assign(row_count_before, 1);
  col.valid.push_back(0);
}

void mark_valid(Column& col) {
  if (!col.valid.empty()) col.valid.push_back(1);
}

// Converts one arrow chunk into the requested logical type.
void append_chunk(Column& col, const arrow::Array& array, const std::filesystem::path& path) {
  const auto type_id = array.type_id();
  auto type_error = [&] {
    throw DataError("'" + path.string() + "': column '" + col.name + "' has unsupported type " +
                    array.type()->ToString());
  };
  const std::int64_t n = array.length();

  const arrow::DictionaryArray* dict = nullptr;
  if (type_id == arrow::Type::DICTIONARY) {
    if (col.type != ColumnType::string) type_error();
    dict = static_cast<const arrow::DictionaryArray*>(&array);
    const auto value_type = dict->dictionary()->type_id();
    if (value_type != arrow::Type::STRING && value_type != arrow::Type::LARGE_STRING) type_error();
  }

  for (std::int64_t i = 0; i < n; ++i) {
    const std::size_t before = col.size();
    if (array.IsNull(i)) {
      mark_null(col, before);
      if (col.type == ColumnType::string) {
        col.strings.emplace_back();
      } else if (col.type == ColumnType::float64) {
        col.reals.push_back(0.0);
      } else {
        col.ints.push_back(0);
      }
      continue;
    }
    mark_valid(col);
    switch (col.type) {
      case ColumnType::int64:
      case ColumnType::int8:
      case ColumnType::boolean:
        switch (type_id) {
          case arrow::Type::INT64: col.ints.push_back(static_cast<const arrow::Int64Array&>(array).Value(i)); break;
          case arrow::Type::INT32: col.ints.push_back(static_cast<const arrow::Int32Array&>(array).Value(i)); break;
          case arrow::Type::INT16: col.ints.push_back(static_cast<const arrow::Int16Array&>(array).Value(i)); break;
          case arrow::Type::INT8: col.ints.push_back(static_cast<const arrow::Int8Array&>(array).Value(i)); break;
          case arrow::Type::UINT32: col.ints.push_back(static_cast<const arrow::UInt32Array&>(array).Value(i)); break;
          case arrow::Type::UINT64: col.ints.push_back(static_cast<std::int64_t>(static_cast<const arrow::UInt64Array&>(array).Value(i))); break;
          case arrow::Type::BOOL: col.ints.push_back(static_cast<const arrow::BooleanArray&>(array).Value(i) ? 1 : 0); break;
          default: type_error();
        }
        break;
      case ColumnType::float64:
        switch (type_id) {
          case arrow::Type::DOUBLE: col.reals.push_back(static_cast<const arrow::DoubleArray&>(array).Value(i)); break;
          case arrow::Type::FLOAT: col.reals.push_back(static_cast<const arrow::FloatArray&>(array).Value(i)); break;
          case arrow::Type::INT64: col.reals.push_back(static_cast<double>(static_cast<const arrow::Int64Array&>(array).Value(i))); break;
          default: type_error();
        }
        break;
      case ColumnType::string:
        if (dict) {
          const std::int64_t k = dict->GetValueIndex(i);
          const auto& values = *dict->dictionary();
          if (values.type_id() == arrow::Type::STRING) {
            col.strings.emplace_back(static_cast<const arrow::StringArray&>(values).GetView(k));
          } else {
            col.strings.emplace_back(static_cast<const arrow::LargeStringArray&>(values).GetView(k));
          }
          break;
        }
        switch (type_id) {
          case arrow::Type::STRING: col.strings.emplace_back(static_cast<const arrow::StringArray&>(array).GetView(i)); break;
          case arrow::Type::LARGE_STRING: col.strings.emplace_back(static_cast<const arrow::LargeStringArray&>(array).GetView(i)); break;
          default: type_error();
        }
        break;
      case ColumnType::timestamp: {
        if (type_id == arrow::Type::TIMESTAMP) {
          const auto& ts_type = static_cast<const arrow::TimestampType&>(*array.type());
          std::int64_t divisor = 1;
          const std::int64_t mult = micros_per_unit(ts_type.unit(), divisor);
          const std::int64_t raw = static_cast<const arrow::TimestampArray&>(array).Value(i);
          col.ints.push_back(divisor > 1 ? (raw >= 0 ? raw / divisor : -((-raw + divisor - 1) / divisor)) : raw * mult);
        } else if (type_id == arrow::Type::DATE32) {
          col.ints.push_back(static_cast<std::int64_t>(static_cast<const arrow::Date32Array&>(array).Value(i)) * 86'400'000'000LL);
        } else {
          type_error();
        }
        break;
      }
    }
  }
}

std::shared_ptr<arrow::Array> to_arrow(const Column& col, const std::filesystem::path& path) {
  const std::size_t n = col.size();
  auto finish = [&](auto& builder) { return unwrap(builder.Finish(), path); };
  switch (col.type) {
    case ColumnType::int64: {
      arrow::Int64Builder b;
      check(b.Reserve(static_cast<std::int64_t>(n)), path);
      for (std::size_t i = 0; i < n; ++i) col.is_valid(i) ? b.UnsafeAppend(col.ints[i]) : b.UnsafeAppendNull();
      return finish(b);
    }
    case ColumnType::int8: {
      arrow::Int8Builder b;
      check(b.Reserve(static_cast<std::int64_t>(n)), path);
      for (std::size_t i = 0; i < n; ++i)
        col.is_valid(i) ? b.UnsafeAppend(static_cast<std::int8_t>(col.ints[i])) : b.UnsafeAppendNull();
      return finish(b);
    }
    case ColumnType::boolean: {
      arrow::BooleanBuilder b;
      check(b.Reserve(static_cast<std::int64_t>(n)), path);
      for (std::size_t i = 0; i < n; ++i) col.is_valid(i) ? b.UnsafeAppend(col.ints[i] != 0) : b.UnsafeAppendNull();
      return finish(b);
    }
    case ColumnType::float64: {
      arrow::DoubleBuilder b;
      check(b.Reserve(static_cast<std::int64_t>(n)), path);
      for (std::size_t i = 0; i < n; ++i) col.is_valid(i) ? b.UnsafeAppend(col.reals[i]) : b.UnsafeAppendNull();
      return finish(b);
    }
    case ColumnType::string: {
      arrow::StringBuilder b;
      for (std::size_t i = 0; i < n; ++i) check(col.is_valid(i) ? b.Append(col.strings[i]) : b.AppendNull(), path);
      return finish(b);
    }
    case ColumnType::timestamp: {
      arrow::TimestampBuilder b(arrow::timestamp(arrow::TimeUnit::MICRO), arrow::default_memory_pool());
      check(b.Reserve(static_cast<std::int64_t>(n)), path);
      for (std::size_t i = 0; i < n; ++i) col.is_valid(i) ? b.UnsafeAppend(col.ints[i]) : b.UnsafeAppendNull();
      return finish(b);
    }
  }
  return nullptr;
}

std::shared_ptr<arrow::DataType> arrow_type(ColumnType t) {
  switch (t) {
    case ColumnType::int64: return arrow::int64();
    case ColumnType::int8: return arrow::int8();
    case ColumnType::boolean: return arrow::boolean();
    case ColumnType::float64: return arrow::float64();
    case ColumnType::string: return arrow::utf8();
    case ColumnType::timestamp: return arrow::timestamp(arrow::TimeUnit::MICRO);
  }
  return arrow::null();
}

}  // namespace

Table read_parquet(const std::filesystem::path& path, std::span<const ColumnRequest> requests) {
  auto input = unwrap(arrow::io::ReadableFile::Open(path.string()), path);
  auto reader = unwrap(parquet::arrow::OpenFile(input, arrow::default_memory_pool()), path);
  std::shared_ptr<arrow::Schema> schema;
  check(reader->GetSchema(&schema), path);

  Table table;
  for (const auto& f : schema->fields()) table.file_columns.push_back(f->name());

  std::vector<int> indices;
  for (const auto& req : requests) {
    const int idx = schema->GetFieldIndex(req.name);
    if (idx < 0) {
      if (req.required) throw DataError("'" + path.string() + "' is missing required column '" + req.name + "'");
      continue;
    }
    indices.push_back(idx);
    table.columns.push_back(Column{.name = req.name, .type = req.type});
  }
  if (indices.empty()) return table;

  auto read = reader->ReadTable(indices);
  check(read.status(), path);
  std::shared_ptr<arrow::Table> data = *read;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    Column& col = table.columns[c];
    auto chunked = data->GetColumnByName(col.name);
    for (const auto& chunk : chunked->chunks()) {
      append_chunk(col, *chunk, path);
    }
  }
  return table;
}

void write_parquet(const std::filesystem::path& path, const Table& table) {
  std::vector<std::shared_ptr<arrow::Field>> fields;
  std::vector<std::shared_ptr<arrow::Array>> arrays;
  for (const auto& col : table.columns) {
    fields.push_back(arrow::field(col.name, arrow_type(col.type), true));
    arrays.push_back(to_arrow(col, path));
  }
  auto arrow_table = arrow::Table::Make(arrow::schema(fields), arrays, static_cast<std::int64_t>(table.rows()));
  auto output = unwrap(arrow::io::FileOutputStream::Open(path.string()), path);
  auto props = parquet::WriterProperties::Builder().compression(parquet::Compression::SNAPPY)->build();
  check(parquet::arrow::WriteTable(*arrow_table, arrow::default_memory_pool(), output, 1 << 16, props), path);
  check(output->Close(), path);
}

#endif

}  // namespace cohort::io::detail
