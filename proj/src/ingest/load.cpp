#include "cohort/errors.hpp"
#include "cohort/events.hpp"
#include "cohort/table_io.hpp"
#include "timeline_internal.hpp"

#include <spdlog/spdlog.h>

namespace cohort {

EventBatch load_events(const std::filesystem::path& path) {
  using io::ColumnType;
  const io::ColumnRequest requests[] = {
      {"subject_id", ColumnType::int64, true},
      {"time", ColumnType::timestamp, true},
      {"code", ColumnType::string, true},
      {"numeric_value", ColumnType::float64, false},
  };
  io::Table table = io::read_table(path, requests);
  const io::Column& subject = *table.find("subject_id");
  const io::Column& time = *table.find("time");
  io::Column& code = *table.find("code");
  const io::Column* value = table.find("numeric_value");

  EventBatch batch;
  const std::size_t n = table.rows();
  batch.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!subject.is_valid(i)) {
      throw DataError("'" + path.string() + "' row " + std::to_string(i + 1) + ": null subject_id");
    }
    if (!time.is_valid(i)) {
      ++batch.null_time_rows;
      continue;
    }
    EventRecord rec;
    rec.subject_id = subject.ints[i];
    rec.time = Timestamp{time.ints[i]};
    rec.code = std::move(code.strings[i]);
    if (value && value->is_valid(i)) rec.numeric_value = value->reals[i];
    batch.records.push_back(std::move(rec));
  }
  if (batch.null_time_rows > 0) {
    spdlog::warn("{}: skipped {} row(s) with null time", path.string(), batch.null_time_rows);
  }
  return batch;
}

CohortSource load_direct_predicates(const std::filesystem::path& path, const TaskConfig& config) {
  using io::ColumnType;
  std::vector<std::string> columns = source_columns(config);
  const std::size_t width = columns.size();
  const std::size_t any_column = width - 1;

  std::vector<io::ColumnRequest> requests = {
      {"subject_id", ColumnType::int64, true},
      {"time", ColumnType::timestamp, true},
  };
  std::vector<std::size_t> given;  // source column for each requested predicate column
  for (std::size_t c = 0; c < any_column; ++c) {
    const Predicate* p = config.find_predicate(columns[c]);
    if (p && std::holds_alternative<PlainPredicate>(*p)) {
      requests.push_back({columns[c], ColumnType::int64, true});
      given.push_back(c);
    }
  }
  requests.push_back({std::string(kAnyEvent), ColumnType::int64, false});

  io::Table table = io::read_table(path, requests);
  const io::Column& subject = *table.find("subject_id");
  const io::Column& time = *table.find("time");
  const io::Column* any = table.find(kAnyEvent);
  const auto derived = detail::DerivedColumns::compile(config, columns);

  CohortSource source;
  source.predicate_names = columns;
  source.provenance_path = path.string();
  source.format = "direct";
  source.stats.input_rows = table.rows();

  detail::IndicatorRows rows;
  rows.width = width;
  const std::size_t n = table.rows();
  for (std::size_t i = 0; i < n; ++i) {
    if (!subject.is_valid(i)) {
      throw DataError("'" + path.string() + "' row " + std::to_string(i + 1) + ": null subject_id");
    }
    if (!time.is_valid(i)) {
      ++source.stats.null_time_rows;
      continue;
    }
    rows.subjects.push_back(subject.ints[i]);
    rows.times.push_back(Timestamp{time.ints[i]});
    const std::size_t base = rows.values.size();
    rows.values.resize(base + width, 0);
    std::int64_t* row = rows.values.data() + base;
    for (std::size_t k = 0; k < given.size(); ++k) {
      const io::Column& col = table.columns[2 + k];
      const std::int64_t v = col.is_valid(i) ? col.ints[i] : 0;
      if (v < 0) {
        throw DataError("'" + path.string() + "' row " + std::to_string(i + 1) + ": negative count " +
                        std::to_string(v) + " for predicate '" + col.name + "'");
      }
      row[given[k]] = v;
    }
    if (any && any->is_valid(i)) {
      if (any->ints[i] < 0) {
        throw DataError("'" + path.string() + "' row " + std::to_string(i + 1) + ": negative _ANY_EVENT count");
      }
      row[any_column] = any->ints[i];
    } else {
      row[any_column] = 1;
    }
    derived.apply(row);
  }
  if (source.stats.null_time_rows > 0) {
    spdlog::warn("{}: skipped {} row(s) with null time", path.string(), source.stats.null_time_rows);
  }
  source.timelines = detail::assemble_timelines(std::move(rows));
  return source;
}

CohortSource load_source(const std::filesystem::path& path, DataStandard standard, const TaskConfig& config) {
  if (standard == DataStandard::direct) return load_direct_predicates(path, config);
  EventBatch batch = load_events(path);
  CohortSource source = build_timeline(batch.records, config);
  source.provenance_path = path.string();
  source.format = "meds";
  source.stats.input_rows = batch.records.size() + batch.null_time_rows;
  source.stats.null_time_rows = batch.null_time_rows;
  return source;
}

}  // namespace cohort
