#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>

namespace doqkd {

/// Selects the OpenMP kernel or the serial reference loop. Both paths run the
/// same per-index body and write to disjoint slots, so results are bitwise equal.
enum class Exec { serial, parallel };

/// Runs body(i) for i in [0, n). An exception thrown by any iteration is
/// rethrown on the calling thread once the loop has finished.
template <class Body>
void parallel_for(std::size_t n, Exec exec, Body&& body) {
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(doqkd_parallel_for_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

int max_threads();

}  // namespace doqkd
