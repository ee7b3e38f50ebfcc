#include <benchmark/benchmark.h>

#include "hpl/hull.hpp"
#include "hpl/perimeter.hpp"
#include "hpl/sampler.hpp"
#include "hpl/snake.hpp"
#include "hpl/stats.hpp"

using namespace hpl;

static void BM_BesselSqStep(benchmark::State& s) {
  RngStream rng(1, 0);
  double x = 1;
  for (auto _ : s) {
    x = sampler::bessel_sq_step(5, x, 1e-3, rng);
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_BesselSqStep);

static void BM_HullExact(benchmark::State& s) {
  RngStream rng(2, 0);
  for (auto _ : s) benchmark::DoNotOptimize(hull::sample_hull_exact(1, rng));
}
BENCHMARK(BM_HullExact);

static void BM_HittingTree(benchmark::State& s) {
  auto cfg = snake::counting_config();
  std::uint64_t i = 0;
  for (auto _ : s) {
    RngStream rng(3, i++);
    benchmark::DoNotOptimize(snake::hitting_tree(1, -1, cfg, rng));
  }
}
BENCHMARK(BM_HittingTree);

static void BM_ExitCountTree(benchmark::State& s) {
  auto cfg = snake::counting_config();
  cfg.eps_height = 0.05;
  std::uint64_t i = 0;
  for (auto _ : s) {
    RngStream rng(4, i++);
    double h = snake::sample_height(cfg.eps_height, rng);
    benchmark::DoNotOptimize(snake::exit_count_tree(2, h, 1, 0.5, cfg, rng));
  }
}
BENCHMARK(BM_ExitCountTree)->Unit(benchmark::kMicrosecond);

static void BM_LampertiFromZero(benchmark::State& s) {
  perimeter::LampertiOptions opt;
  std::uint64_t i = 0;
  for (auto _ : s) {
    RngStream rng(5, i++);
    benchmark::DoNotOptimize(perimeter::simulate_from_zero({1.0}, 0.005, opt, rng));
  }
}
BENCHMARK(BM_LampertiFromZero)->Unit(benchmark::kMillisecond);

static void BM_DistanceCorrelation(benchmark::State& s) {
  RngStream rng(6, 0);
  std::vector<double> x(s.range(0)), y(s.range(0));
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.normal();
    y[i] = x[i] + rng.normal();
  }
  for (auto _ : s) benchmark::DoNotOptimize(stats::distance_correlation(x, y));
  s.SetComplexityN(s.range(0));
}
BENCHMARK(BM_DistanceCorrelation)->Range(1 << 10, 1 << 16)->Complexity(benchmark::oNLogN);
BENCHMARK_MAIN();
