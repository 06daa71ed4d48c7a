#pragma once

// Reference extractor for differential testing. Resolves every boundary of
// every anchor straight from the TaskConfig with linear scans over the
// per-timestamp counts, and only filters once a realization is complete.
// Shares no code with the engine beyond the data types.

#include "cohort/config.hpp"
#include "cohort/engine.hpp"
#include "cohort/events.hpp"

#include <vector>

namespace cohort::oracle {

std::vector<CohortRow> naive_extract(const CohortSource& source, const TaskConfig& config,
                                     const ExtractOptions& options = {});

}  // namespace cohort::oracle
