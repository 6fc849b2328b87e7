#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace specdiff {

/// Worker count used by OpenMP regions. 0 keeps the runtime default.
/// SPECDIFF_THREADS, when set, wins over the requested count.
void set_worker_count(std::size_t workers);
std::size_t worker_count();

/// Run f(i) for i in [0, n) across workers. Exceptions are collected and the
/// one from the lowest index is rethrown after the loop.
template <typename F>
void parallel_for(std::size_t n, F&& f) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      f(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace specdiff
