#include "specdiff/core/parallel.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

namespace specdiff {

void set_worker_count(std::size_t workers) {
  if (const char* env = std::getenv("SPECDIFF_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) workers = static_cast<std::size_t>(n);
  }
  omp_set_dynamic(0);
  if (workers > 0) omp_set_num_threads(static_cast<int>(workers));
}

std::size_t worker_count() { return static_cast<std::size_t>(omp_get_max_threads()); }

}  // namespace specdiff
