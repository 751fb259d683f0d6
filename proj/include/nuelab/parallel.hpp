#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <type_traits>
#include <vector>

namespace nuelab {

/// Half-open index range [begin, end) handled by worker `worker` of `workers`.
struct Shard {
  std::size_t begin;
  std::size_t end;
};

inline Shard shard_of(std::size_t count, unsigned workers, unsigned worker) {
  return {count * worker / workers, count * (worker + 1) / workers};
}

/// Evaluates fn(i) for i in [0, count) on `workers` threads, each owning a
/// contiguous index range. Results come back in index order, so any
/// reduction done by the caller is independent of the worker count.
/// The first exception (by worker index) is rethrown after all workers join.
template <class Fn>
auto map_indices(std::size_t count, unsigned workers, Fn&& fn) {
  using Result = std::invoke_result_t<Fn&, std::size_t>;
  std::vector<Result> out(count);
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  std::vector<std::exception_ptr> errors(workers);
  auto body = [&](unsigned w) {
    try {
      const Shard s = shard_of(count, workers, w);
      for (std::size_t i = s.begin; i < s.end; ++i) out[i] = fn(i);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    body(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body, w);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace nuelab
