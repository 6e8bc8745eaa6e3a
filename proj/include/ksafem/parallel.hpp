// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ksafem {

// Execution policy for the element/node kernels. Every parallel kernel in
// this code base is a pure map over an index range writing to disjoint
// slots; reductions happen afterwards in index order on a single thread.
// The OpenMP path is therefore bitwise identical to the serial reference,
// which the tests assert.
enum class Exec { Serial, Parallel };

template <class Fn>
inline void for_each_index(Exec exec, std::int64_t n, Fn&& fn) {
  if (exec == Exec::Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
#endif
  }
  for (std::int64_t i = 0; i < n; ++i) fn(i);
}

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace ksafem
