#pragma once

#include <cstddef>
#include <functional>

namespace prognosis {

// Runs fn(0..n-1) on up to n_threads workers pulling indices from a shared
// counter. Callers keep determinism by writing only to per-index slots;
// scheduling order never influences results. Exceptions are rethrown on the
// calling thread.
void parallel_for(std::size_t n, int n_threads, const std::function<void(std::size_t)>& fn);

int default_threads();

}  // namespace prognosis
