#pragma once

#include <cstddef>
#include <functional>

namespace lpi {

/// Worker count used by parallel loops. 1 means run inline.
/// Resolution order: set_thread_count() > LPI_THREADS environment variable > 1.
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunk boundaries depend
/// only on n and chunk_size, so per-index results never depend on the worker count.
void parallel_for(std::size_t n, std::size_t chunk_size,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace lpi
