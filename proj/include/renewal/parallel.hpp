#pragma once

#include <cstddef>
#include <functional>

namespace renewal {

/// Hardware concurrency, capped by the RENEWAL_THREADS environment variable.
unsigned worker_count();

/// Runs body(i) once for every i in [0, n) on up to worker_count() threads.
/// Results are deterministic as long as body writes only to slot i. The first
/// exception thrown by any call is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace renewal
