#pragma once

#include <cstddef>
#include <functional>

namespace hwforest {

/// Process-wide worker cap. Defaults to the HWFOREST_THREADS environment
/// variable when set, otherwise to the hardware concurrency. Always >= 1.
std::size_t thread_limit();

/// Overrides the worker cap. n == 0 restores the default resolution.
void set_thread_limit(std::size_t n);

/// Runs fn(i) for i in [0, count). Work is split into contiguous index
/// blocks, one per worker. Each index is processed exactly once, so tasks
/// that write only to slot i of a preallocated output are deterministic
/// regardless of the worker count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

} // namespace hwforest
