#pragma once

#include <cstddef>
#include <functional>

namespace tsckit {

// Number of workers to use: 0 selects hardware concurrency, 1 runs inline.
int resolve_thread_count(int threads);

// Splits [0, n) into one contiguous chunk per worker and runs chunk_fn(begin, end)
// on each. Chunks are disjoint, so results are independent of scheduling as long
// as workers only write to their own rows. Exceptions are rethrown on the caller.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t, std::size_t)>& chunk_fn);

}  // namespace tsckit
