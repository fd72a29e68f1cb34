#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fedscore {

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Runs body(i) for i in [0, n) across OpenMP threads. Each index must write
// only to its own output slot so results do not depend on the schedule. The
// first exception thrown by any iteration is rethrown on the calling thread.
template <typename Body>
void parallel_for(std::size_t n, Body&& body, bool dynamic = false) {
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const auto count = static_cast<long long>(n);
  auto guarded = [&](long long i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };
  if (dynamic) {
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < count; ++i) guarded(i);
  } else {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < count; ++i) guarded(i);
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace fedscore
