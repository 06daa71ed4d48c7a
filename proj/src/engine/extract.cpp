#include "cohort/engine.hpp"

#include "cohort/errors.hpp"
#include "cohort/output.hpp"
#include "cohort/simd/kernels.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <thread>

namespace cohort {

RealizationSet::RealizationSet(std::int64_t subject_id, std::size_t node_count, std::vector<Timestamp> anchors)
    : subject_id_(subject_id), size_(anchors.size()), times_(node_count), anchor_ordinal_(anchors.size()) {
  auto& root = times_[WindowTree::root];
  root.reserve(anchors.size());
  for (std::size_t r = 0; r < anchors.size(); ++r) {
    root.push_back(anchors[r].micros);
    anchor_ordinal_[r] = r;
  }
}

void RealizationSet::retain(std::span<const std::uint8_t> keep) {
  std::size_t kept = 0;
  for (std::size_t r = 0; r < size_; ++r) {
    if (!keep[r]) continue;
    if (kept != r) {
      for (auto& col : times_)
        if (col.size() == size_) col[kept] = col[r];
      anchor_ordinal_[kept] = anchor_ordinal_[r];
    }
    ++kept;
  }
  for (auto& col : times_)
    if (col.size() == size_) col.resize(kept);
  anchor_ordinal_.resize(kept);
  size_ = kept;
}

CompiledTask CompiledTask::compile(const TaskConfig& config, const CohortSource& source) {
  CompiledTask task;
  task.width = source.predicate_names.size();
  auto column = [&](const std::string& pred) {
    auto c = source.column(pred);
    if (!c) throw DataError("data source has no column for predicate '" + pred + "'");
    return *c;
  };
  for (const auto& name : source_columns(config)) (void)column(name);

  task.tree = build_tree(config);
  task.order = traversal_order(task.tree);
  for (const auto& e : task.order) {
    task.edge_columns.push_back(e.kind == SpanKind::event_bound ? column(e.predicate) : 0);
  }
  task.trigger_column = column(config.trigger);
  task.closing.resize(task.tree.nodes.size());

  for (std::size_t w = 0; w < config.windows.size(); ++w) {
    const WindowDef& def = config.windows[w];
    Window win;
    win.name = def.name;
    win.start_node = task.tree.node_for(def.name, Side::start);
    win.end_node = task.tree.node_for(def.name, Side::end);
    win.start_inclusive = def.start_inclusive;
    win.end_inclusive = def.end_inclusive;
    win.constraints = def.constraints;
    win.lower.assign(task.width, 0);
    win.upper.assign(task.width, std::numeric_limits<std::int64_t>::max());
    for (const auto& c : def.constraints) {
      const std::size_t col = column(c.predicate);
      if (c.min) win.lower[col] = std::max(win.lower[col], *c.min);
      if (c.max) win.upper[col] = std::min(win.upper[col], *c.max);
    }
    for (const auto& p : reported_predicates(def)) win.reported.emplace_back(p, column(p));
    if (def.label_predicate) {
      task.label_window = w;
      task.label_column = column(*def.label_predicate);
    }
    task.closing[std::max(win.start_node, win.end_node)].push_back(w);
    task.windows.push_back(std::move(win));
  }
  return task;
}

namespace {

// Marks realizations whose windows closing at `node` are reversed or violate
// their count bounds.
void filter_closing(const CompiledTask& task, const SubjectTimeline& timeline, const RealizationSet& set,
                    NodeId node, std::vector<std::uint8_t>& keep) {
  const auto& kernels = simd::active();
  std::vector<std::int64_t> counts(task.width);
  for (const std::size_t w : task.closing[node]) {
    const auto& win = task.windows[w];
    for (std::size_t r = 0; r < set.size(); ++r) {
      if (!keep[r]) continue;
      const Timestamp start = set.at(win.start_node, r);
      const Timestamp end = set.at(win.end_node, r);
      if (end < start) {
        keep[r] = 0;
        continue;
      }
      if (win.constraints.empty()) continue;
      const auto [first, last] = interval_rows(timeline, start, end, win.start_inclusive, win.end_inclusive);
      if (first == last) {
        std::fill(counts.begin(), counts.end(), 0);
      } else {
        kernels.row_difference(timeline.cumulative_row(last - 1).data(),
                               first > 0 ? timeline.cumulative_row(first - 1).data() : nullptr, counts.data(),
                               task.width);
      }
      if (!kernels.within_bounds(counts.data(), win.lower.data(), win.upper.data(), task.width)) keep[r] = 0;
    }
  }
}

}  // namespace

RealizationSet extract_subtree(const CompiledTask& task, const SubjectTimeline& timeline, RealizationSet set,
                               std::size_t cursor) {
  if (set.empty() || cursor == task.order.size()) return set;
  const TreeEdge& edge = task.order[cursor];
  if (!set.assigned(edge.parent)) {
    throw std::logic_error("extract_subtree: parent '" + task.tree.node(edge.parent).id + "' unresolved");
  }
  const std::size_t n = set.size();
  std::vector<std::uint8_t> keep(n, 1);
  std::vector<std::int64_t> child(n);
  const auto parent = set.column(edge.parent);

  switch (edge.kind) {
    case SpanKind::temporal: {
      std::int64_t delta = 0;
      if (__builtin_mul_overflow(edge.offset_seconds, kMicrosPerSecond, &delta) ||
          !simd::active().offset_all(parent.data(), delta, child.data(), n)) {
        throw std::overflow_error("timestamp overflow resolving '" + task.tree.node(edge.child).id +
                                  "' for subject " + std::to_string(set.subject_id()));
      }
      break;
    }
    case SpanKind::event_bound: {
      const std::size_t column = task.edge_columns[cursor];
      for (std::size_t r = 0; r < n; ++r) {
        auto t = resolve_event_bound_endpoint(timeline, Timestamp{parent[r]}, column, edge.direction);
        if (t) {
          child[r] = t->micros;
        } else {
          keep[r] = 0;
          child[r] = parent[r];
        }
      }
      break;
    }
    case SpanKind::unbounded_sentinel: {
      // Clamped so an unbounded side never reverses its window.
      const std::int64_t first = timeline.first_time().micros;
      const std::int64_t last = timeline.last_time().micros;
      for (std::size_t r = 0; r < n; ++r) {
        child[r] = edge.sentinel_side == Side::start ? std::min(first, parent[r]) : std::max(last, parent[r]);
      }
      break;
    }
  }
  set.mutable_column(edge.child) = std::move(child);
  filter_closing(task, timeline, set, edge.child, keep);
  set.retain(keep);
  return extract_subtree(task, timeline, std::move(set), cursor + 1);
}

std::vector<CohortRow> extract_subject(const CompiledTask& task, const SubjectTimeline& timeline,
                                       const ExtractOptions& options) {
  std::vector<CohortRow> rows;
  if (timeline.empty()) return rows;
  auto anchors = find_trigger_anchors(timeline, task.trigger_column, options.multi_anchor);
  if (anchors.empty()) return rows;

  RealizationSet set(timeline.subject_id(), task.tree.nodes.size(), std::move(anchors));
  std::vector<std::uint8_t> keep(set.size(), 1);
  filter_closing(task, timeline, set, WindowTree::root, keep);
  set.retain(keep);
  set = extract_subtree(task, timeline, std::move(set), 0);

  rows.reserve(set.size());
  for (std::size_t r = 0; r < set.size(); ++r) {
    CohortRow row;
    row.subject_id = timeline.subject_id();
    row.index_timestamp = set.at(task.tree.index_node, r);
    if (task.label_window) {
      const auto& win = task.windows[*task.label_window];
      const std::int64_t n = count_in_interval(timeline, set.at(win.start_node, r), set.at(win.end_node, r),
                                               win.start_inclusive, win.end_inclusive, task.label_column);
      row.label = n >= 1 ? 1 : 0;
    }
    if (options.include_window_stats) {
      for (const auto& win : task.windows) {
        WindowSummary s;
        s.window = win.name;
        s.start = set.at(win.start_node, r);
        s.end = set.at(win.end_node, r);
        for (const auto& [pred, col] : win.reported) {
          s.counts.emplace_back(pred, count_in_interval(timeline, s.start, s.end, win.start_inclusive,
                                                        win.end_inclusive, col));
        }
        s.truncated = s.start < timeline.first_time() || s.end > timeline.last_time();
        row.windows.push_back(std::move(s));
      }
    }
    rows.push_back(std::move(row));
  }
  // Survivors are in anchor order; a stable sort keeps that order for ties.
  std::stable_sort(rows.begin(), rows.end(),
                   [](const CohortRow& a, const CohortRow& b) { return a.index_timestamp < b.index_timestamp; });
  return rows;
}

std::vector<CohortRow> extract_cohort(const CohortSource& source, const TaskConfig& config,
                                      const ExtractOptions& options) {
  const CompiledTask task = CompiledTask::compile(config, source);
  const std::size_t n = source.timelines.size();
  const std::size_t workers = std::clamp<std::size_t>(options.threads, 1, std::max<std::size_t>(n, 1));

  // Contiguous subject ranges per worker; concatenating the parts in worker
  // order keeps the output identical to a serial run.
  std::vector<std::vector<CohortRow>> parts(workers);
  auto run_range = [&](std::size_t w) {
    const std::size_t begin = n * w / workers;
    const std::size_t end = n * (w + 1) / workers;
    for (std::size_t i = begin; i < end; ++i) {
      auto rows = extract_subject(task, source.timelines[i], options);
      parts[w].insert(parts[w].end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
    }
  };
  if (workers == 1) {
    run_range(0);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          run_range(w);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  std::vector<CohortRow> rows;
  for (auto& p : parts) rows.insert(rows.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
  return rows;
}

}  // namespace cohort
