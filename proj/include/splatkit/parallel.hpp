#pragma once

#include <cstddef>
#include <functional>

namespace splatkit {

/// Global cap on worker threads (the CLI --threads flag lands here).
/// 0 means hardware concurrency.
void set_max_threads(int n);
int max_threads();

/// Runs fn(begin..end) split into contiguous chunks across the worker pool.
/// Chunks are disjoint, so any per-index pure work is bit-identical to the
/// sequential loop. Falls back to inline execution for small ranges.
void parallel_for(size_t begin, size_t end, const std::function<void(size_t, size_t)>& fn,
                  size_t grain = 1);

} // namespace splatkit
