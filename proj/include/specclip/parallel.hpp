#pragma once

#include <cstddef>
#include <functional>

namespace specclip {

/// Worker cap: SPECCLIP_THREADS when set, otherwise hardware concurrency.
/// Always at least 1.
std::size_t worker_count();

/// Runs fn(begin, end) over disjoint chunks of [0, n), possibly on
/// multiple threads. Chunk boundaries depend only on n and the worker
/// count, never on scheduling, so writes to disjoint slots stay
/// deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace specclip
