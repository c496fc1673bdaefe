#include "voronoigram/parallel.hpp"

#include <cstdlib>
#include <string>

namespace voronoigram::par {

int max_threads() { return omp_get_max_threads(); }

void set_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("VORONOIGRAM_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
  }
  return omp_get_num_procs();
}

}  // namespace voronoigram::par
