#include "ftlab/common.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace ftlab {

namespace {
std::atomic<int> g_threads{1};

template <class T>
T pairwise(std::span<const T> v) {
  if (v.size() <= 16) {
    T s{};
    for (const T& x : v) s += x;
    return s;
  }
  const std::size_t mid = v.size() / 2;
  return pairwise(v.subspan(0, mid)) + pairwise(v.subspan(mid));
}
}  // namespace

void set_thread_count(int k) {
  if (k < 1) throw std::invalid_argument("thread count must be >= 1");
  g_threads = k;
}

int thread_count() { return g_threads; }

void parallel_for(Index n, const std::function<void(Index, Index)>& body) {
  if (n <= 0) return;
  const Index workers = std::min<Index>(g_threads.load(), n);
  if (workers <= 1) {
    body(0, n);
    return;
  }
  const Index chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  pool.reserve(static_cast<std::size_t>(workers));
  for (Index w = 0; w < workers; ++w) {
    const Index b = w * chunk;
    const Index e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&body, &errors, w, b, e] {
      try {
        body(b, e);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

double pairwise_sum(std::span<const double> v) { return pairwise(v); }
cplx pairwise_sum(std::span<const cplx> v) { return pairwise(v); }

}  // namespace ftlab
