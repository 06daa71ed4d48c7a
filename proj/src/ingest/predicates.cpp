#include "cohort/events.hpp"

#include <algorithm>

namespace cohort {

int evaluate_plain_predicate(const EventRecord& record, const PlainPredicate& pred) {
  if (!pred.code.matches(record.code)) return 0;
  if (pred.value_min || pred.value_max) {
    if (!record.numeric_value) return 0;
    const double v = *record.numeric_value;
    if (pred.value_min && v < *pred.value_min) return 0;
    if (pred.value_max && v > *pred.value_max) return 0;
  }
  return 1;
}

std::vector<std::string> source_columns(const TaskConfig& config) {
  std::vector<std::string> cols =
      config.dependency_order.empty() ? predicate_dependency_order(config) : config.dependency_order;
  cols.emplace_back(kAnyEvent);
  return cols;
}

std::optional<std::size_t> CohortSource::column(std::string_view predicate) const {
  for (std::size_t i = 0; i < predicate_names.size(); ++i)
    if (predicate_names[i] == predicate) return i;
  return std::nullopt;
}

const SubjectTimeline* CohortSource::find(std::int64_t subject_id) const {
  auto it = std::lower_bound(timelines.begin(), timelines.end(), subject_id,
                             [](const SubjectTimeline& t, std::int64_t id) { return t.subject_id() < id; });
  if (it == timelines.end() || it->subject_id() != subject_id) return nullptr;
  return &*it;
}

}  // namespace cohort
