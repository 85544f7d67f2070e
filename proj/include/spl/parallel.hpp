#pragma once

#include <cstddef>
#include <functional>

namespace spl {

/// Worker count: SPL_THREADS if set to a positive integer, else the hardware concurrency.
unsigned thread_count();
void set_thread_count(unsigned n);

/// Runs body(i) for i in [0, n) across thread_count() workers in contiguous blocks.
/// Each index is processed exactly once; callers write results per index so the
/// outcome does not depend on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace spl
