#pragma once

#include <cstddef>
#include <functional>

namespace adce {

/// Runs body(0..count-1) on up to `threads` workers (0 = hardware
/// concurrency). Tasks are claimed in index order; callers write results into
/// per-index slots so the outcome does not depend on scheduling. If tasks
/// throw, the exception of the lowest failing index is rethrown after all
/// workers stop.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

/// Worker count actually used for `threads` (0 = hardware concurrency, at least 1).
unsigned resolve_threads(unsigned threads);

}  // namespace adce
