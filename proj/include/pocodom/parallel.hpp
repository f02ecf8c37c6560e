#pragma once

#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pocodom {

/// Selects between the OpenMP kernel and the serial reference loop. The two
/// paths must produce bit-identical results; the tests hold them to that.
enum class Exec { Serial, Parallel };

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

/// Runs body(i) for i in [0, n). Iterations must be independent.
template <typename Body>
void for_each_index(Exec exec, std::size_t n, Body&& body) {
  const auto count = static_cast<long long>(n);
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 256)
    for (long long i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
  } else {
    for (long long i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
  }
}

/// Deterministic reduction: [0, n) is cut into fixed blocks whose size does
/// not depend on the thread count, each block is folded serially, and the
/// block partials are combined in block order. Serial and parallel runs
/// therefore add floating-point terms in exactly the same order.
template <typename T, typename Body, typename Combine>
T reduce_blocks(Exec exec, std::size_t n, const T& zero, Body&& body, Combine&& combine,
                std::size_t block = 1024) {
  if (n == 0) return zero;
  const std::size_t blocks = (n + block - 1) / block;
  std::vector<T> partial(blocks, zero);
  for_each_index(exec, blocks, [&](std::size_t b) {
    const std::size_t lo = b * block;
    const std::size_t hi = lo + block < n ? lo + block : n;
    T acc = zero;
    for (std::size_t i = lo; i < hi; ++i) body(acc, i);
    partial[b] = acc;
  });
  T total = zero;
  for (const T& p : partial) combine(total, p);
  return total;
}

}  // namespace pocodom
