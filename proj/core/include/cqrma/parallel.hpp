#pragma once

#include <cstddef>
#include <functional>

namespace cqrma {

/// Number of workers actually used for `count` tasks when `requested` is
/// given (0 means hardware concurrency).
int resolve_thread_count(int requested, std::size_t count);

/// Runs fn(0), ..., fn(count - 1) across worker threads. Tasks must write to
/// disjoint slots. Every task runs even after a failure; the exception from
/// the smallest failing index is rethrown on the caller thread, so error
/// reporting does not depend on scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  int threads = 0);

}  // namespace cqrma
