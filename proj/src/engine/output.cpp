#include "cohort/output.hpp"

#include <algorithm>
#include <stdexcept>

namespace cohort {

std::vector<std::string> reported_predicates(const WindowDef& window) {
  std::vector<std::string> out;
  for (const auto& c : window.constraints) out.push_back(c.predicate);
  if (window.label_predicate && std::find(out.begin(), out.end(), *window.label_predicate) == out.end()) {
    out.push_back(*window.label_predicate);
  }
  return out;
}

io::Table cohort_table(std::span<const CohortRow> rows, const TaskConfig& config, bool include_window_stats) {
  using io::Column;
  using io::ColumnType;
  io::Table table;
  Column subject{.name = "subject_id", .type = ColumnType::int64};
  Column index{.name = "index_timestamp", .type = ColumnType::timestamp};
  for (const auto& r : rows) {
    subject.ints.push_back(r.subject_id);
    index.ints.push_back(r.index_timestamp.micros);
  }
  table.columns.push_back(std::move(subject));
  table.columns.push_back(std::move(index));

  if (config.label_window()) {
    Column label{.name = "label", .type = ColumnType::int8};
    for (const auto& r : rows) label.ints.push_back(r.label.value_or(0));
    table.columns.push_back(std::move(label));
  }

  if (include_window_stats) {
    for (std::size_t w = 0; w < config.windows.size(); ++w) {
      const WindowDef& win = config.windows[w];
      const auto preds = reported_predicates(win);
      Column start{.name = win.name + ".start", .type = ColumnType::timestamp};
      Column end{.name = win.name + ".end", .type = ColumnType::timestamp};
      std::vector<Column> counts;
      for (const auto& p : preds) counts.push_back(Column{.name = win.name + "." + p, .type = ColumnType::int64});
      Column truncated{.name = win.name + ".window_truncated", .type = ColumnType::boolean};
      for (const auto& r : rows) {
        if (r.windows.size() != config.windows.size()) {
          throw std::logic_error("cohort_table: row lacks window summaries");
        }
        const WindowSummary& s = r.windows[w];
        start.ints.push_back(s.start.micros);
        end.ints.push_back(s.end.micros);
        for (std::size_t k = 0; k < preds.size(); ++k) counts[k].ints.push_back(s.counts[k].second);
        truncated.ints.push_back(s.truncated ? 1 : 0);
      }
      table.columns.push_back(std::move(start));
      table.columns.push_back(std::move(end));
      for (auto& c : counts) table.columns.push_back(std::move(c));
      table.columns.push_back(std::move(truncated));
    }
  }
  return table;
}

void write_cohort(const std::filesystem::path& path, std::span<const CohortRow> rows, const TaskConfig& config,
                  bool include_window_stats) {
  io::write_table(path, cohort_table(rows, config, include_window_stats));
}

}  // namespace cohort
