#pragma once

#include "cohort/events.hpp"

namespace cohort::detail {

/// Row-wise event indicators ready for grouping: `values` is [n x width].
struct IndicatorRows {
  std::vector<std::int64_t> subjects;
  std::vector<Timestamp> times;
  std::vector<std::int64_t> values;
  std::size_t width = 0;
};

/// Derived predicates with operands resolved to column indices, in dependency order.
struct DerivedColumns {
  struct Entry {
    std::size_t column;
    Combinator combinator;
    std::vector<std::size_t> operands;
  };
  std::vector<Entry> entries;

  static DerivedColumns compile(const TaskConfig& config, const std::vector<std::string>& columns);
  void apply(std::int64_t* row) const;
};

std::vector<SubjectTimeline> assemble_timelines(IndicatorRows rows);

}  // namespace cohort::detail
