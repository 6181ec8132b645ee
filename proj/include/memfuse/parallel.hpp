#pragma once

#include <cstddef>
#include <functional>

namespace memfuse {

// Runs fn(0..n-1) on up to `workers` threads (<= 0: hardware concurrency).
// Callers write into preassigned slots, so results do not depend on
// scheduling. The exception of the lowest failing index is rethrown.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

int default_workers();

}  // namespace memfuse
