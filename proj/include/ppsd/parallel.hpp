#pragma once

#include <cstddef>
#include <functional>

#include "ppsd/core.hpp"

namespace ppsd {

/**
 * Runs body(i) for i in [0, n) on up to thread_count() workers.
 *
 * Each index is processed exactly once; callers write results into
 * per-index slots so the outcome does not depend on scheduling.
 * The first exception thrown by any worker is rethrown on the caller.
 */
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace ppsd
