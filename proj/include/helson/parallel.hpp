#pragma once

// Execution policy for the data-parallel kernels.  Every parallel kernel has
// a serial twin with identical arithmetic: work is cut into fixed blocks and
// block results are combined by a fixed pairwise tree, so the result does not
// depend on the thread count.  The test suite asserts serial/parallel results
// are bitwise equal.

#include <algorithm>
#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace helson {

enum class Exec { Serial, Parallel };

inline Exec& default_exec_ref() {
#ifdef _OPENMP
  static Exec exec = Exec::Parallel;
#else
  static Exec exec = Exec::Serial;
#endif
  return exec;
}

inline Exec default_exec() { return default_exec_ref(); }
inline void set_default_exec(Exec e) { default_exec_ref() = e; }

template <typename F>
void parallel_for(std::int64_t lo, std::int64_t hi, Exec exec, F&& body) {
  if (exec == Exec::Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8)
    for (std::int64_t i = lo; i < hi; ++i) body(i);
    return;
#endif
  }
  for (std::int64_t i = lo; i < hi; ++i) body(i);
}

// Pairwise reduction with a fixed tree (in-place, destroys v).
inline double pairwise_reduce(std::vector<double>& v) {
  if (v.empty()) return 0.0;
  std::size_t n = v.size();
  while (n > 1) {
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i + half < n; ++i) v[i] += v[i + half];
    n = half;
  }
  return v[0];
}

inline constexpr std::int64_t kSumBlock = 4096;

// Deterministic blocked sum of term(0..n_terms-1): serial accumulation inside
// fixed blocks, pairwise tree over block partials.
template <typename TermFn>
double block_pairwise_sum(std::int64_t n_terms, Exec exec, TermFn&& term) {
  if (n_terms <= 0) return 0.0;
  const std::int64_t nblocks = (n_terms + kSumBlock - 1) / kSumBlock;
  std::vector<double> partial(static_cast<std::size_t>(nblocks));
  parallel_for(0, nblocks, exec, [&](std::int64_t b) {
    const std::int64_t blo = b * kSumBlock;
    const std::int64_t bhi = std::min(n_terms, blo + kSumBlock);
    double s = 0.0;
    for (std::int64_t i = blo; i < bhi; ++i) s += term(i);
    partial[static_cast<std::size_t>(b)] = s;
  });
  return pairwise_reduce(partial);
}

}  // namespace helson
