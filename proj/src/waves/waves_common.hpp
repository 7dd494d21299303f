#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace thetafay::detail {

// Runs fn(i) for every grid index.  Results go to caller-owned slots, so the
// outcome is independent of the thread count; the first exception (by index)
// is rethrown after the loop.
template <class Fn>
void for_each_point(std::size_t n, bool parallel, Fn&& fn) {
  std::vector<std::exception_ptr> errs(n);
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < long(n); ++i) {
      try {
        fn(std::size_t(i));
      } catch (...) {
        errs[std::size_t(i)] = std::current_exception();
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  }
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

}  // namespace thetafay::detail
