#pragma once

#include <cstddef>
#include <functional>

namespace mfusion {

/// Worker count used by parallel loops. The MFUSION_THREADS environment
/// variable overrides the hardware concurrency; values < 1 mean serial.
int thread_count();

/// Runs fn(i) for every i in [begin, end). Indices are handed out in
/// chunks to up to thread_count() workers; fn must only write state owned
/// by its index so results do not depend on scheduling. The first
/// exception thrown by any worker is rethrown on the calling thread.
void parallel_for(std::ptrdiff_t begin, std::ptrdiff_t end,
                  const std::function<void(std::ptrdiff_t)>& fn);

}  // namespace mfusion
