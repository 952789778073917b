#pragma once

#include <cstddef>
#include <functional>

namespace coral {

/// Worker count used by parallel loops: the CORAL_WORKERS environment
/// variable when set to a positive integer, otherwise the hardware
/// concurrency (at least 1).
std::size_t worker_count();

/// Runs body(begin, end) over a static partition of [0, n) into one
/// contiguous block per worker. Bodies must write only to per-index slots;
/// combined with sequential final reductions this keeps every result
/// bit-identical regardless of the worker count. Exceptions from workers
/// are rethrown on the calling thread.
void parallel_for_blocks(std::size_t n,
                         const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace coral
