#include "cohort/engine.hpp"

#include <algorithm>
#include <stdexcept>

namespace cohort {

std::vector<Timestamp> find_trigger_anchors(const SubjectTimeline& timeline, std::size_t trigger_column,
                                            bool multi_anchor) {
  std::vector<Timestamp> anchors;
  for (std::size_t i = 0; i < timeline.size(); ++i) {
    const std::int64_t k = timeline.count(i, trigger_column);
    if (k <= 0) continue;
    anchors.insert(anchors.end(), multi_anchor ? static_cast<std::size_t>(k) : 1, timeline.time(i));
  }
  return anchors;
}

Timestamp resolve_temporal_endpoint(Timestamp anchor, std::int64_t offset_seconds) {
  return add_seconds(anchor, offset_seconds);
}

std::optional<Timestamp> resolve_event_bound_endpoint(const SubjectTimeline& timeline, Timestamp anchor,
                                                      std::size_t column, SearchDirection direction) {
  const auto ts = timeline.timestamps();
  const std::size_t n = ts.size();
  if (n == 0) return std::nullopt;

  if (direction == SearchDirection::next) {
    const std::size_t from = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), anchor) - ts.begin());
    if (from == n) return std::nullopt;
    const std::int64_t base = from > 0 ? timeline.cumulative(from - 1, column) : 0;
    if (timeline.cumulative(n - 1, column) == base) return std::nullopt;
    // Smallest row >= from whose prefix sum exceeds the base.
    std::size_t lo = from, hi = n - 1;
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (timeline.cumulative(mid, column) > base) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    return ts[lo];
  }

  const std::size_t below = static_cast<std::size_t>(std::lower_bound(ts.begin(), ts.end(), anchor) - ts.begin());
  if (below == 0) return std::nullopt;
  const std::size_t last = below - 1;
  const std::int64_t target = timeline.cumulative(last, column);
  if (target == 0) return std::nullopt;
  // Smallest row whose prefix sum reaches the target is the last occurrence.
  std::size_t lo = 0, hi = last;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (timeline.cumulative(mid, column) >= target) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return ts[lo];
}

std::pair<std::size_t, std::size_t> interval_rows(const SubjectTimeline& timeline, Timestamp start, Timestamp end,
                                                  bool start_inclusive, bool end_inclusive) {
  const auto ts = timeline.timestamps();
  const auto first = start_inclusive ? std::lower_bound(ts.begin(), ts.end(), start)
                                     : std::upper_bound(ts.begin(), ts.end(), start);
  const auto last = end_inclusive ? std::upper_bound(ts.begin(), ts.end(), end)
                                  : std::lower_bound(ts.begin(), ts.end(), end);
  const auto f = static_cast<std::size_t>(first - ts.begin());
  const auto l = static_cast<std::size_t>(last - ts.begin());
  return {f, std::max(f, l)};
}

std::int64_t count_in_interval(const SubjectTimeline& timeline, Timestamp start, Timestamp end,
                               bool start_inclusive, bool end_inclusive, std::size_t column) {
  if (end < start) {
    throw std::logic_error("count_in_interval: subject " + std::to_string(timeline.subject_id()) +
                           " interval start " + format_timestamp(start) + " is after end " + format_timestamp(end));
  }
  const auto [first, last] = interval_rows(timeline, start, end, start_inclusive, end_inclusive);
  if (first == last) return 0;
  const std::int64_t upper = timeline.cumulative(last - 1, column);
  const std::int64_t lower = first > 0 ? timeline.cumulative(first - 1, column) : 0;
  return upper - lower;
}

bool check_constraints(const WindowSummary& summary, std::span<const ConstraintBound> constraints) {
  for (const auto& c : constraints) {
    auto it = std::find_if(summary.counts.begin(), summary.counts.end(),
                           [&](const auto& kv) { return kv.first == c.predicate; });
    if (it == summary.counts.end()) {
      throw std::logic_error("check_constraints: window '" + summary.window + "' has no count for '" +
                             c.predicate + "'");
    }
    if (!c.admits(it->second)) return false;
  }
  return true;
}

}  // namespace cohort
