#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#include <omp.h>

namespace neuroauth {

// Runs body(i) for i in [0, n) on an OpenMP team. Exceptions cannot cross the
// region boundary, so each is captured and the lowest-index one is rethrown
// after the join (the same one a serial loop would have raised first).
template <class Body>
void parallel_for(std::size_t n, Body&& body, int num_threads = 0) {
  std::vector<std::exception_ptr> errors(n);
  const long long count = static_cast<long long>(n);
  if (num_threads <= 0) num_threads = omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(num_threads)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace neuroauth
