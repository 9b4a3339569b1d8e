#ifndef SVFLOW_PARALLEL_HPP
#define SVFLOW_PARALLEL_HPP

#include <exception>
#include <mutex>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace svflow {

/// Execution policy for per-element kernels. Serial is the reference path;
/// OpenMP distributes elements across threads. Both produce identical results
/// because every element writes only to its own slot.
enum class ExecMode { Serial, OpenMP };

inline int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

/// Applies f(k) for k in [0, n). Exceptions thrown by f under OpenMP are
/// captured and rethrown on the calling thread (first one wins).
template <class F>
void for_each_element(ExecMode mode, int n, F&& f) {
#ifdef _OPENMP
  if (mode == ExecMode::OpenMP) {
    std::exception_ptr err;
    std::mutex err_mutex;
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < n; ++k) {
      try {
        f(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!err) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);
    return;
  }
#else
  (void)mode;
#endif
  for (int k = 0; k < n; ++k) f(k);
}

}  // namespace svflow

#endif
