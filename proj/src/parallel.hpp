#pragma once

#include <omp.h>

#include <exception>
#include <mutex>

namespace intact::detail {

/// Runs body(i) for i in [0, count) on up to `threads` OpenMP workers. Each
/// index must touch only its own output slot. The first exception thrown by
/// any worker is rethrown after the barrier.
template <class Body>
void parallel_for(long count, int threads, Body&& body) {
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const int workers = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for num_threads(workers) schedule(static)
  for (long i = 0; i < count; ++i) {
    try {
      body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace intact::detail
