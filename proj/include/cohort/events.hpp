#pragma once

// Event-stream ingestion and the per-subject timeline index that every
// window query reads from.

#include "cohort/config.hpp"
#include "cohort/time.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cohort {

struct EventRecord {
  std::int64_t subject_id = 0;
  Timestamp time;
  std::string code;
  std::optional<double> numeric_value;
};

struct EventBatch {
  std::vector<EventRecord> records;  // file order, timed rows only
  std::size_t null_time_rows = 0;
};

/// Reads a MEDS-like table (subject_id, time, code[, numeric_value]).
/// Parquet when the path ends in `.parquet`, CSV otherwise.
EventBatch load_events(const std::filesystem::path& path);

/// 0/1 indicator of a single event against a plain predicate. Events without
/// a numeric value fail any value-bounded predicate.
int evaluate_plain_predicate(const EventRecord& record, const PlainPredicate& pred);

/// ANY_OF is the max of the operand values, ALL_OF the min. `column_of` maps
/// an operand name to its index in `row`.
template <class ColumnOf>
std::int64_t evaluate_derived_predicate(std::span<const std::int64_t> row,
                                        const DerivedPredicate& pred, ColumnOf&& column_of) {
  std::int64_t acc = pred.combinator == Combinator::any_of ? 0 : INT64_MAX;
  for (const auto& op : pred.operands) {
    std::int64_t v = row[column_of(op)];
    acc = pred.combinator == Combinator::any_of ? (v > acc ? v : acc) : (v < acc ? v : acc);
  }
  return acc;
}

/// One subject's events collapsed to distinct timestamps. `counts` and
/// `cumulative` are row-major [n_rows x width]; column order follows
/// CohortSource::predicate_names.
class SubjectTimeline {
 public:
  SubjectTimeline() = default;
  SubjectTimeline(std::int64_t subject_id, std::vector<Timestamp> timestamps,
                  std::vector<std::int64_t> counts, std::size_t width);

  std::int64_t subject_id() const noexcept { return subject_id_; }
  std::size_t size() const noexcept { return timestamps_.size(); }
  bool empty() const noexcept { return timestamps_.empty(); }
  std::size_t width() const noexcept { return width_; }

  std::span<const Timestamp> timestamps() const noexcept { return timestamps_; }
  Timestamp time(std::size_t row) const { return timestamps_[row]; }
  Timestamp first_time() const { return timestamps_.front(); }
  Timestamp last_time() const { return timestamps_.back(); }

  std::int64_t count(std::size_t row, std::size_t column) const { return counts_[row * width_ + column]; }
  std::int64_t cumulative(std::size_t row, std::size_t column) const {
    return cumulative_[row * width_ + column];
  }
  std::span<const std::int64_t> count_row(std::size_t row) const {
    return {counts_.data() + row * width_, width_};
  }
  std::span<const std::int64_t> cumulative_row(std::size_t row) const {
    return {cumulative_.data() + row * width_, width_};
  }

  friend bool operator==(const SubjectTimeline&, const SubjectTimeline&) = default;

 private:
  std::int64_t subject_id_ = 0;
  std::vector<Timestamp> timestamps_;
  std::size_t width_ = 0;
  std::vector<std::int64_t> counts_;
  std::vector<std::int64_t> cumulative_;
};

enum class DataStandard { meds, direct };

struct IngestStats {
  std::size_t input_rows = 0;
  std::size_t null_time_rows = 0;

  friend bool operator==(const IngestStats&, const IngestStats&) = default;
};

struct CohortSource {
  std::vector<SubjectTimeline> timelines;  // ascending subject_id
  std::vector<std::string> predicate_names;  // dependency order, then _ANY_EVENT
  std::string provenance_path;
  std::string format;  // "meds", "direct" or "memory"
  IngestStats stats;

  std::optional<std::size_t> column(std::string_view predicate) const;
  const SubjectTimeline* find(std::int64_t subject_id) const;
};

/// Column list a source built for `config` carries.
std::vector<std::string> source_columns(const TaskConfig& config);

/// Groups events by subject, sorts by time, evaluates predicates per raw event
/// and merges equal timestamps by summing. Input order does not matter.
CohortSource build_timeline(std::span<const EventRecord> records, const TaskConfig& config);

/// Pre-extracted predicate counts: subject_id, time, one column per plain
/// predicate, optional _ANY_EVENT.
CohortSource load_direct_predicates(const std::filesystem::path& path, const TaskConfig& config);

CohortSource load_source(const std::filesystem::path& path, DataStandard standard,
                         const TaskConfig& config);

}  // namespace cohort
