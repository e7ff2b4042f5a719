#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace crowdcount::detail {

// OpenMP loop over [0, n) that rethrows the first exception raised by `body`
// once the loop has finished. Iterations must write disjoint outputs.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace crowdcount::detail
