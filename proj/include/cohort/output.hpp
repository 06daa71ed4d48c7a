#pragma once

#include "cohort/engine.hpp"
#include "cohort/table_io.hpp"

#include <filesystem>
#include <span>

namespace cohort {

/// Predicates reported per window: constrained ones in declaration order,
/// then the label predicate when not already listed.
std::vector<std::string> reported_predicates(const WindowDef& window);

/// subject_id, index_timestamp, label (when the task has a label window) and,
/// with window stats, `<w>.start`, `<w>.end`, `<w>.<pred>`..., `<w>.window_truncated`
/// per window in declaration order. The schema is the same for zero rows.
io::Table cohort_table(std::span<const CohortRow> rows, const TaskConfig& config, bool include_window_stats);

void write_cohort(const std::filesystem::path& path, std::span<const CohortRow> rows, const TaskConfig& config,
                  bool include_window_stats);

}  // namespace cohort
