#pragma once

// OpenMP shim. Use these macros instead of raw pragmas so the library builds
// (and behaves identically) without OpenMP.

#if defined(TDEL_HAVE_OPENMP)
#include <omp.h>
#define TDEL_PRAGMA(x) _Pragma(#x)
#define TDEL_OMP_PARALLEL_FOR TDEL_PRAGMA(omp parallel for schedule(static))
#define TDEL_OMP_PARALLEL_FOR_DYNAMIC TDEL_PRAGMA(omp parallel for schedule(dynamic, 1))
#else
#define TDEL_OMP_PARALLEL_FOR
#define TDEL_OMP_PARALLEL_FOR_DYNAMIC
#endif

#include <cstddef>
#include <exception>
#include <mutex>

namespace tdel {

inline int max_threads() {
#if defined(TDEL_HAVE_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_threads(int n) {
#if defined(TDEL_HAVE_OPENMP)
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

enum class Execution { Serial, Parallel };

/// Runs body(i) for i in [0, n) across threads. The first exception thrown
/// by any iteration is rethrown after the loop.
template <class Body>
void parallel_for(std::ptrdiff_t n, Body&& body) {
  std::exception_ptr failure;
  std::mutex guard;
  TDEL_OMP_PARALLEL_FOR_DYNAMIC
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

template <class Body>
void for_each_index(Execution exec, std::ptrdiff_t n, Body&& body) {
  if (exec == Execution::Parallel) {
    parallel_for(n, body);
    return;
  }
  for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
}

}  // namespace tdel
