#pragma once

#include <cstddef>
#include <functional>

namespace mabt {

// Worker cap: MABT_THREADS env var, 0 or unset = hardware concurrency.
std::size_t worker_count();

// Runs fn(0..n-1), possibly on several threads. Each index must write only
// its own output slot; results are then reduced serially by the caller in
// index order, so the outcome is identical for any worker count. Nested
// calls from inside a worker run serially.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace mabt
