//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLSHIFT_TRAINPIPE_PARALLEL_HPP_
#define MOLSHIFT_TRAINPIPE_PARALLEL_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace molshift {

// Worker cap from MOLSHIFT_THREADS, else the hardware concurrency.
inline int worker_count() {
  if (const char *env = std::getenv("MOLSHIFT_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1)
        return n;
    } catch (const std::exception &) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for i in [0, n) over contiguous chunks on up to worker_count()
/// threads. Callers write results by index, so the outcome does not depend on
/// the thread count. The first exception, by index order, is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, Fn &&fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(worker_count()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (std::size_t i = w * chunk; i < std::min(n, (w + 1) * chunk); ++i)
          fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread &t: threads)
    t.join();
  for (const std::exception_ptr &e: errors) {
    if (e)
      std::rethrow_exception(e);
  }
}

}  // namespace molshift

#endif  // MOLSHIFT_TRAINPIPE_PARALLEL_HPP_
