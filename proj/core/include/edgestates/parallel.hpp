#pragma once

#include <cstddef>
#include <functional>

namespace edgestates {

// Thread count from EDGESTATES_NUM_THREADS, else hardware concurrency.
unsigned worker_count();

// Runs body(i) for i in [0, n) on worker_count() threads. Each index is written
// by exactly one task, so results stored by index are deterministic.
// The first exception thrown by any task is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace edgestates
