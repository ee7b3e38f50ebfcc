#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace hpl {

// Replicate i of a Monte Carlo run draws from RngStream(seed, stream_base + i).
struct McOptions {
  std::uint64_t seed = 1;
  int workers = 1;
  std::uint64_t stream_base = 0;
};

// Worker count after applying the HALFPLANE_LAB_THREADS override.
int resolve_workers(int requested);

// Runs body(i) for i in [0, n) on `workers` threads. Indices are handed out in
// small chunks; the first exception thrown by any body is rethrown.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body);

template <class T, class F>
std::vector<T> parallel_map(std::size_t n, int workers, F&& f) {
  std::vector<T> out(n);
  parallel_for(n, workers, [&](std::size_t i) { out[i] = f(i); });
  return out;
}

}  // namespace hpl
