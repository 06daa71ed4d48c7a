#include "cohort/errors.hpp"
#include "cohort/events.hpp"
#include "cohort/simd/kernels.hpp"
#include "timeline_internal.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace cohort {

SubjectTimeline::SubjectTimeline(std::int64_t subject_id, std::vector<Timestamp> timestamps,
                                 std::vector<std::int64_t> counts, std::size_t width)
    : subject_id_(subject_id),
      timestamps_(std::move(timestamps)),
      width_(width),
      counts_(std::move(counts)),
      cumulative_(counts_.size()) {
  if (counts_.size() != timestamps_.size() * width_) {
    throw std::invalid_argument("SubjectTimeline: counts do not match timestamps x width");
  }
  for (std::size_t i = 1; i < timestamps_.size(); ++i) {
    if (!(timestamps_[i - 1] < timestamps_[i])) {
      throw std::invalid_argument("SubjectTimeline: timestamps must be strictly increasing");
    }
  }
  simd::accumulate_rows(counts_, cumulative_, width_);
}

namespace detail {

DerivedColumns DerivedColumns::compile(const TaskConfig& config, const std::vector<std::string>& columns) {
  auto index_of = [&](const std::string& name) {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw std::logic_error("column '" + name + "' missing from source layout");
    return static_cast<std::size_t>(it - columns.begin());
  };
  DerivedColumns out;
  for (const auto& name : columns) {
    const Predicate* p = config.find_predicate(name);
    if (!p) continue;
    if (const auto* d = std::get_if<DerivedPredicate>(p)) {
      Entry e{index_of(name), d->combinator, {}};
      for (const auto& op : d->operands) e.operands.push_back(index_of(op));
      out.entries.push_back(std::move(e));
    }
  }
  return out;
}

void DerivedColumns::apply(std::int64_t* row) const {
  for (const auto& e : entries) {
    std::int64_t acc = row[e.operands.front()];
    for (std::size_t k = 1; k < e.operands.size(); ++k) {
      const std::int64_t v = row[e.operands[k]];
      acc = e.combinator == Combinator::any_of ? std::max(acc, v) : std::min(acc, v);
    }
    row[e.column] = acc;
  }
}

std::vector<SubjectTimeline> assemble_timelines(IndicatorRows rows) {
  const std::size_t n = rows.subjects.size();
  const std::size_t width = rows.width;
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (rows.subjects[a] != rows.subjects[b]) return rows.subjects[a] < rows.subjects[b];
    if (rows.times[a] != rows.times[b]) return rows.times[a] < rows.times[b];
    return a < b;
  });

  std::vector<SubjectTimeline> timelines;
  std::size_t i = 0;
  while (i < n) {
    const std::int64_t subject = rows.subjects[order[i]];
    std::vector<Timestamp> stamps;
    std::vector<std::int64_t> counts;
    for (; i < n && rows.subjects[order[i]] == subject; ++i) {
      const std::uint32_t ev = order[i];
      const Timestamp t = rows.times[ev];
      if (stamps.empty() || stamps.back() != t) {
        stamps.push_back(t);
        counts.resize(counts.size() + width, 0);
      }
      std::int64_t* dst = counts.data() + counts.size() - width;
      const std::int64_t* src = rows.values.data() + static_cast<std::size_t>(ev) * width;
      for (std::size_t c = 0; c < width; ++c) dst[c] += src[c];
    }
    timelines.emplace_back(subject, std::move(stamps), std::move(counts), width);
  }
  return timelines;
}

}  // namespace detail

CohortSource build_timeline(std::span<const EventRecord> records, const TaskConfig& config) {
  CohortSource source;
  source.predicate_names = source_columns(config);
  source.format = "memory";
  source.stats.input_rows = records.size();
  const std::size_t width = source.predicate_names.size();
  const std::size_t any_column = width - 1;

  // Plain predicates: code matching depends only on the code string, so it is
  // evaluated once per distinct code; value bounds are checked per event.
  struct PlainColumn {
    std::size_t column;
    const PlainPredicate* pred;
  };
  std::vector<PlainColumn> plain;
  for (std::size_t c = 0; c < any_column; ++c) {
    const Predicate* p = config.find_predicate(source.predicate_names[c]);
    if (const auto* pp = p ? std::get_if<PlainPredicate>(p) : nullptr) plain.push_back({c, pp});
  }
  const auto derived = detail::DerivedColumns::compile(config, source.predicate_names);

  std::unordered_map<std::string_view, std::vector<std::uint8_t>> code_matches;
  detail::IndicatorRows rows;
  rows.width = width;
  rows.subjects.reserve(records.size());
  rows.times.reserve(records.size());
  rows.values.assign(records.size() * width, 0);

  for (std::size_t r = 0; r < records.size(); ++r) {
    const EventRecord& ev = records[r];
    rows.subjects.push_back(ev.subject_id);
    rows.times.push_back(ev.time);
    auto [it, inserted] = code_matches.try_emplace(ev.code);
    if (inserted) {
      it->second.resize(plain.size());
      for (std::size_t k = 0; k < plain.size(); ++k) it->second[k] = plain[k].pred->code.matches(ev.code);
    }
    std::int64_t* row = rows.values.data() + r * width;
    for (std::size_t k = 0; k < plain.size(); ++k) {
      if (!it->second[k]) continue;
      const PlainPredicate& p = *plain[k].pred;
      if (p.value_min || p.value_max) {
        row[plain[k].column] = evaluate_plain_predicate(ev, p);
      } else {
        row[plain[k].column] = 1;
      }
    }
    row[any_column] = 1;
    derived.apply(row);
  }
  source.timelines = detail::assemble_timelines(std::move(rows));
  return source;
}

}  // namespace cohort
