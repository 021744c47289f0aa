#pragma once

#include <functional>

namespace meshsim {

/// Worker cap: MESHSIM_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
int worker_count();

/// Runs fn(0..n-1) on up to `workers` threads (0 = worker_count()). Each
/// index runs exactly once; if any call throws, the exception of the lowest
/// failing index is rethrown after all workers finish.
void parallel_for(int n, const std::function<void(int)>& fn, int workers = 0);

}  // namespace meshsim
