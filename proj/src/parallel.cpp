#include "hpl/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "hpl/error.hpp"

namespace hpl {

int resolve_workers(int requested) {
  if (const char* env = std::getenv("HALFPLANE_LAB_THREADS")) {
    try {
      int v = std::stoi(env);
      if (v >= 1) return v;
    } catch (const std::exception&) {
    }
    fail(ErrorKind::config, "HALFPLANE_LAB_THREADS must be a positive integer");
  }
  if (requested >= 1) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body) {
  if (n == 0) return;
  std::size_t w = std::min<std::size_t>(std::max(1, workers), n);
  if (w == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const std::size_t chunk = std::max<std::size_t>(1, n / (w * 16));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr first;
  std::mutex mu;
  auto run = [&] {
    while (!stop.load(std::memory_order_relaxed)) {
      std::size_t b = next.fetch_add(chunk);
      if (b >= n) break;
      std::size_t e = std::min(n, b + chunk);
      try {
        for (std::size_t i = b; i < e; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first) first = std::current_exception();
        stop = true;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < w; ++t) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
  if (first) std::rethrow_exception(first);
}

}  // namespace hpl
