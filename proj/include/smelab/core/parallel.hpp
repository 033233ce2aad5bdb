#pragma once

#include <cstddef>
#include <functional>

namespace smelab {

// 0 means hardware concurrency.
unsigned resolve_threads(unsigned requested);

/**
 * Calls body(begin, end) on disjoint chunks covering [0, n). Chunks may run on
 * different threads; callers write results by index so the outcome does not
 * depend on scheduling. The first exception thrown by a chunk is rethrown.
 */
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace smelab
