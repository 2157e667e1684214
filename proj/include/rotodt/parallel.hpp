#pragma once

#include <cstddef>
#include <functional>

namespace rotodt {

/// Number of worker threads used by the data-parallel kernels (>= 1).
int num_threads();

/// Sets the worker count; 0 selects std::thread::hardware_concurrency().
void set_num_threads(int threads);

/// Splits [0, n) into contiguous chunks and runs fn(begin, end) on each,
/// one chunk per worker. Runs inline when a single worker is configured.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace rotodt
