#pragma once

// Recursive resolution of a boundary tree over subject timelines.

#include "cohort/config.hpp"
#include "cohort/events.hpp"
#include "cohort/window_tree.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cohort {

struct WindowSummary {
  std::string window;
  Timestamp start;
  Timestamp end;
  std::vector<std::pair<std::string, std::int64_t>> counts;  // constrained predicates, then label predicate
  bool truncated = false;  // interval reaches outside the observed record

  friend bool operator==(const WindowSummary&, const WindowSummary&) = default;
};

struct CohortRow {
  std::int64_t subject_id = 0;
  Timestamp index_timestamp;
  std::optional<std::int8_t> label;
  std::vector<WindowSummary> windows;  // filled only with include_window_stats

  friend bool operator==(const CohortRow&, const CohortRow&) = default;
};

struct ExtractOptions {
  bool include_window_stats = false;
  bool multi_anchor = false;  // one anchor per trigger event instead of per timestamp
  unsigned threads = 1;
};

/// Trigger timestamps in increasing order; with `multi_anchor` a timestamp
/// carrying k trigger events is repeated k times.
std::vector<Timestamp> find_trigger_anchors(const SubjectTimeline& timeline, std::size_t trigger_column,
                                            bool multi_anchor = false);

Timestamp resolve_temporal_endpoint(Timestamp anchor, std::int64_t offset_seconds);

/// First timestamp strictly after (next) or last strictly before (previous)
/// the anchor with a nonzero count in `column`.
std::optional<Timestamp> resolve_event_bound_endpoint(const SubjectTimeline& timeline, Timestamp anchor,
                                                      std::size_t column, SearchDirection direction);

/// Sum of `column` over rows inside the interval. Requires start <= end
/// (std::logic_error otherwise).
std::int64_t count_in_interval(const SubjectTimeline& timeline, Timestamp start, Timestamp end,
                               bool start_inclusive, bool end_inclusive, std::size_t column);

/// Row range [first, last) of the interval.
std::pair<std::size_t, std::size_t> interval_rows(const SubjectTimeline& timeline, Timestamp start, Timestamp end,
                                                  bool start_inclusive, bool end_inclusive);

bool check_constraints(const WindowSummary& summary, std::span<const ConstraintBound> constraints);

/// Candidate assignments for one subject, stored column-wise: `times[node][r]`
/// is realization r's timestamp for `node` (micros). Columns are filled in
/// traversal order.
class RealizationSet {
 public:
  RealizationSet(std::int64_t subject_id, std::size_t node_count, std::vector<Timestamp> anchors);

  std::int64_t subject_id() const noexcept { return subject_id_; }
  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }
  std::size_t node_count() const noexcept { return times_.size(); }

  std::span<const std::int64_t> column(NodeId node) const { return times_[node]; }
  std::vector<std::int64_t>& mutable_column(NodeId node) { return times_[node]; }
  Timestamp at(NodeId node, std::size_t r) const { return Timestamp{times_[node][r]}; }
  bool assigned(NodeId node) const noexcept { return times_[node].size() == size_; }
  std::size_t anchor_ordinal(std::size_t r) const { return anchor_ordinal_[r]; }

  /// Keeps realizations with keep[r] != 0, preserving order.
  void retain(std::span<const std::uint8_t> keep);

 private:
  std::int64_t subject_id_;
  std::size_t size_;
  std::vector<std::vector<std::int64_t>> times_;
  std::vector<std::size_t> anchor_ordinal_;
};

/// Everything the engine needs that depends only on config + column layout.
struct CompiledTask {
  struct Window {
    std::string name;
    NodeId start_node;
    NodeId end_node;
    bool start_inclusive;
    bool end_inclusive;
    std::vector<ConstraintBound> constraints;
    std::vector<std::int64_t> lower;  // per source column, for the vectorized bounds check
    std::vector<std::int64_t> upper;
    std::vector<std::pair<std::string, std::size_t>> reported;  // summary predicates -> column
  };

  WindowTree tree;
  std::vector<TreeEdge> order;
  std::vector<std::size_t> edge_columns;  // event-bound predicate column per edge (unused otherwise)
  std::vector<Window> windows;
  std::vector<std::vector<std::size_t>> closing;  // node -> window indices
  std::size_t width = 0;
  std::size_t trigger_column = 0;
  std::optional<std::size_t> label_window;
  std::size_t label_column = 0;

  static CompiledTask compile(const TaskConfig& config, const CohortSource& source);
};

/// Resolves edges order[cursor..] for every realization, dropping one as
/// soon as a window closing at a freshly resolved node is reversed or
/// violates its constraints. Returns the fully assigned survivors.
RealizationSet extract_subtree(const CompiledTask& task, const SubjectTimeline& timeline, RealizationSet realizations,
                               std::size_t cursor);

std::vector<CohortRow> extract_subject(const CompiledTask& task, const SubjectTimeline& timeline,
                                       const ExtractOptions& options);

/// Rows ordered by (subject_id, index_timestamp), ties in anchor order.
std::vector<CohortRow> extract_cohort(const CohortSource& source, const TaskConfig& config,
                                      const ExtractOptions& options = {});

}  // namespace cohort
