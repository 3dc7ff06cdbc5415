#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace jrp {

/// Worker count used when a caller passes 0: JRP_WORKERS if set, else 1.
inline int default_workers() {
  if (const char* env = std::getenv("JRP_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  return 1;
}

namespace detail {

/// results[i] = fn(i) for i in [0, tasks). Task boundaries never depend on the
/// worker count, so a sequential fold over the results is reproducible.
/// The first failing task (by index) has its exception rethrown.
template <class Result, class Fn>
std::vector<Result> parallel_map(std::size_t tasks, int workers, Fn&& fn) {
  std::vector<Result> results(tasks);
  if (workers <= 0) workers = default_workers();
  const auto nthreads = static_cast<std::size_t>(std::min<std::size_t>(workers, tasks));
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < tasks; ++i) results[i] = fn(i);
    return results;
  }
  std::vector<std::exception_ptr> errors(tasks);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks) return;
      try {
        results[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(run);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

}  // namespace detail
}  // namespace jrp
