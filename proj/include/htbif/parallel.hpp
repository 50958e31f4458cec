#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace htbif {

/// Evaluates f(i) for i in [0, count) on a small thread pool. Results keep
/// index order; an exception thrown by f(i) is stored in errors[i].
template <class R>
struct IndexedResults {
  std::vector<std::optional<R>> values;
  std::vector<std::exception_ptr> errors;
};

template <class R, class F>
IndexedResults<R> parallel_map(std::size_t count, F&& f, unsigned max_threads = 0) {
  IndexedResults<R> out;
  out.values.resize(count);
  out.errors.resize(count);
  unsigned threads = max_threads ? max_threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        out.values[i].emplace(f(i));
      } catch (...) {
        out.errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
    return out;
  }
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return out;
}

}  // namespace htbif
