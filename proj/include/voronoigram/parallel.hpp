#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <omp.h>

namespace voronoigram::par {

int max_threads();
void set_threads(int n);

/// Resolve a thread count: explicit > 0 wins, then VORONOIGRAM_THREADS,
/// then the hardware default.
int resolve_threads(int requested);

/// Sum of term(0) + ... + term(n-1) with a fixed blocking that does not
/// depend on the number of threads, so the result is bit-identical for any
/// OMP_NUM_THREADS.
template <class Term>
double ordered_block_sum(std::size_t n, Term&& term, std::size_t block = 4096) {
  if (n == 0) return 0.0;
  const std::size_t nblocks = (n + block - 1) / block;
  std::vector<double> partial(nblocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(nblocks); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * block;
    const std::size_t hi = lo + block < n ? lo + block : n;
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    partial[static_cast<std::size_t>(b)] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

}  // namespace voronoigram::par
