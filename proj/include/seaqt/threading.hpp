#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#else
#include <chrono>
inline int omp_get_max_threads() { return 1; }
inline int omp_get_thread_num() { return 0; }
inline double omp_get_wtime() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}
#endif

namespace seaqt {

/// Execution policy for the batch kernels. Serial is the reference path the
/// tests compare against; Parallel fans the same per-item work out over
/// OpenMP threads. Items must be independent, so both paths produce
/// identical results.
enum class Exec { Serial, Parallel };

void set_thread_count(int n);  // 0 keeps the OpenMP default
int thread_count();

template <typename Fn>
void for_each_index(std::int64_t n, Exec exec, Fn&& fn) {
  if (exec == Exec::Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
#endif
  }
  for (std::int64_t i = 0; i < n; ++i) fn(i);
}

}  // namespace seaqt
