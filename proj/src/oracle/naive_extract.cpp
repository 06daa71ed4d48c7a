#include "cohort/oracle.hpp"

#include "cohort/errors.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace cohort::oracle {
namespace {

std::size_t column_index(const CohortSource& source, const std::string& name) {
  for (std::size_t i = 0; i < source.predicate_names.size(); ++i)
    if (source.predicate_names[i] == name) return i;
  throw DataError("data source has no column for predicate '" + name + "'");
}

// Plain loop over every row; no prefix sums.
std::int64_t scan_count(const SubjectTimeline& tl, Timestamp start, Timestamp end, bool start_incl, bool end_incl,
                        std::size_t col) {
  std::int64_t total = 0;
  for (std::size_t r = 0; r < tl.size(); ++r) {
    const Timestamp t = tl.time(r);
    const bool after = start_incl ? t >= start : t > start;
    const bool before = end_incl ? t <= end : t < end;
    if (after && before) total += tl.count(r, col);
  }
  return total;
}

class Resolver {
 public:
  Resolver(const CohortSource& source, const TaskConfig& config, const SubjectTimeline& tl, Timestamp anchor)
      : source_(source), config_(config), tl_(tl), anchor_(anchor) {}

  // nullopt when an event-bound search comes up empty.
  std::optional<Timestamp> resolve(const std::string& window, Side side) {
    const std::string key = window + (side == Side::start ? ".start" : ".end");
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (!in_progress_.insert(key).second) throw std::logic_error("oracle: cyclic reference at " + key);
    const WindowDef& def = *config_.find_window(window);
    const BoundaryExpr& expr = def.boundary(side);
    std::optional<Timestamp> out;
    if (expr.kind == BoundaryKind::unbounded) {
      auto other = resolve(window, side == Side::start ? Side::end : Side::start);
      if (other) {
        out = side == Side::start ? std::min(tl_.first_time(), *other) : std::max(tl_.last_time(), *other);
      }
    } else {
      auto base = resolve_ref(expr.reference);
      if (base) {
        switch (expr.kind) {
          case BoundaryKind::reference:
            out = base;
            break;
          case BoundaryKind::temporal_offset:
            out = add_seconds(*base, expr.signed_offset_seconds());
            break;
          case BoundaryKind::event_bound:
            out = search(*base, column_index(source_, expr.bound_predicate), expr.direction);
            break;
          case BoundaryKind::unbounded:
            break;
        }
      }
    }
    in_progress_.erase(key);
    memo_[key] = out;
    return out;
  }

 private:
  std::optional<Timestamp> resolve_ref(const BoundaryRef& ref) {
    if (ref.is_trigger) return anchor_;
    return resolve(ref.window, ref.side);
  }

  std::optional<Timestamp> search(Timestamp from, std::size_t col, SearchDirection dir) const {
    std::optional<Timestamp> best;
    for (std::size_t r = 0; r < tl_.size(); ++r) {
      const Timestamp t = tl_.time(r);
      if (tl_.count(r, col) < 1) continue;
      if (dir == SearchDirection::next && t > from && (!best || t < *best)) best = t;
      if (dir == SearchDirection::previous && t < from && (!best || t > *best)) best = t;
    }
    return best;
  }

  const CohortSource& source_;
  const TaskConfig& config_;
  const SubjectTimeline& tl_;
  Timestamp anchor_;
  std::map<std::string, std::optional<Timestamp>> memo_;
  std::set<std::string> in_progress_;
};

std::vector<std::string> summary_predicates(const WindowDef& w) {
  std::vector<std::string> out;
  for (const auto& c : w.constraints)
    if (std::find(out.begin(), out.end(), c.predicate) == out.end()) out.push_back(c.predicate);
  if (w.label_predicate && std::find(out.begin(), out.end(), *w.label_predicate) == out.end())
    out.push_back(*w.label_predicate);
  return out;
}

}  // namespace

std::vector<CohortRow> naive_extract(const CohortSource& source, const TaskConfig& config,
                                     const ExtractOptions& options) {
  for (const auto& name : source_columns(config)) (void)column_index(source, name);
  const std::size_t trigger_col = column_index(source, config.trigger);

  std::vector<const SubjectTimeline*> subjects;
  for (const auto& tl : source.timelines) subjects.push_back(&tl);
  std::stable_sort(subjects.begin(), subjects.end(),
                   [](auto* a, auto* b) { return a->subject_id() < b->subject_id(); });

  std::vector<CohortRow> rows;
  for (const SubjectTimeline* tl : subjects) {
    std::vector<Timestamp> anchors;
    for (std::size_t r = 0; r < tl->size(); ++r) {
      const std::int64_t k = tl->count(r, trigger_col);
      if (k < 1) continue;
      for (std::int64_t i = 0; i < (options.multi_anchor ? k : 1); ++i) anchors.push_back(tl->time(r));
    }

    std::vector<CohortRow> subject_rows;
    for (const Timestamp anchor : anchors) {
      Resolver resolver(source, config, *tl, anchor);
      bool alive = true;
      std::vector<std::pair<Timestamp, Timestamp>> spans;
      for (const auto& w : config.windows) {
        auto s = resolver.resolve(w.name, Side::start);
        auto e = resolver.resolve(w.name, Side::end);
        if (!s || !e) {
          alive = false;
          break;
        }
        spans.emplace_back(*s, *e);
      }
      if (!alive) continue;

      for (std::size_t i = 0; i < config.windows.size() && alive; ++i) {
        const WindowDef& w = config.windows[i];
        const auto [s, e] = spans[i];
        if (s > e) {
          alive = false;
          break;
        }
        for (const auto& c : w.constraints) {
          const auto n = scan_count(*tl, s, e, w.start_inclusive, w.end_inclusive, column_index(source, c.predicate));
          if ((c.min && n < *c.min) || (c.max && n > *c.max)) {
            alive = false;
            break;
          }
        }
      }
      if (!alive) continue;

      CohortRow row;
      row.subject_id = tl->subject_id();
      row.index_timestamp = anchor;
      for (std::size_t i = 0; i < config.windows.size(); ++i) {
        const WindowDef& w = config.windows[i];
        if (w.index_boundary) row.index_timestamp = w.index_boundary == Side::start ? spans[i].first : spans[i].second;
        if (w.label_predicate) {
          const auto n = scan_count(*tl, spans[i].first, spans[i].second, w.start_inclusive, w.end_inclusive,
                                    column_index(source, *w.label_predicate));
          row.label = static_cast<std::int8_t>(n > 0 ? 1 : 0);
        }
        if (options.include_window_stats) {
          WindowSummary s;
          s.window = w.name;
          s.start = spans[i].first;
          s.end = spans[i].second;
          for (const auto& p : summary_predicates(w)) {
            s.counts.emplace_back(p, scan_count(*tl, s.start, s.end, w.start_inclusive, w.end_inclusive,
                                                column_index(source, p)));
          }
          s.truncated = s.start < tl->time(0) || s.end > tl->time(tl->size() - 1);
          row.windows.push_back(std::move(s));
        }
      }
      subject_rows.push_back(std::move(row));
    }
    std::stable_sort(subject_rows.begin(), subject_rows.end(),
                     [](const CohortRow& a, const CohortRow& b) { return a.index_timestamp < b.index_timestamp; });
    rows.insert(rows.end(), subject_rows.begin(), subject_rows.end());
  }
  return rows;
}

}  // namespace cohort::oracle
