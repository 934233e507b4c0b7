#pragma once

#include <cstddef>
#include <functional>

namespace augclust {

/// Runs fn(i) for every i in [0, n) across `workers` threads with static
/// contiguous partitioning. fn must be safe to run concurrently for distinct
/// i. Determinism contract: callers write to per-index slots and reduce in
/// index order afterwards, so the result is identical for any worker count.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

/// Hardware concurrency clamped to [1, 8]; the default for workers = 0.
int default_workers();

}  // namespace augclust
