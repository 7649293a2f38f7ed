#include <benchmark/benchmark.h>

#include <cmath>

#include "qsx/kernels.hpp"
#include "qsx/rng.hpp"

namespace {

struct Sample {
  std::vector<double> sites;
  qsx::PointSet images{2};
};

Sample make_sample(std::size_t m) {
  qsx::Rng rng(m);
  Sample s;
  double x = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    x += 0.01 + rng.uniform();
    s.sites.push_back(x);
    const double r = std::pow(x, 0.7);
    s.images.push_back(std::vector<double>{r * std::cos(x), r * std::sin(x)});
  }
  return s;
}

void BM_WeakQsReference(benchmark::State& state) {
  const auto s = make_sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(qsx::kernels::weak_qs_scan_reference(s.sites, s.images));
  state.SetComplexityN(state.range(0));
}

void BM_WeakQsParallel(benchmark::State& state) {
  const auto s = make_sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(qsx::kernels::weak_qs_scan(s.sites, s.images));
  state.SetComplexityN(state.range(0));
}

void BM_PairMaxReference(benchmark::State& state) {
  const auto s = make_sample(static_cast<std::size_t>(state.range(0)));
  auto f = [&](std::size_t i, std::size_t j) {
    return qsx::distance(s.images[i], s.images[j]) / std::abs(s.sites[i] - s.sites[j]);
  };
  for (auto _ : state) benchmark::DoNotOptimize(qsx::kernels::pair_max_reference(s.sites.size(), f));
}

void BM_PairMaxParallel(benchmark::State& state) {
  const auto s = make_sample(static_cast<std::size_t>(state.range(0)));
  auto f = [&](std::size_t i, std::size_t j) {
    return qsx::distance(s.images[i], s.images[j]) / std::abs(s.sites[i] - s.sites[j]);
  };
  for (auto _ : state) benchmark::DoNotOptimize(qsx::kernels::pair_max(s.sites.size(), f));
}

}  // namespace

BENCHMARK(BM_WeakQsReference)->RangeMultiplier(2)->Range(32, 256)->Complexity();
BENCHMARK(BM_WeakQsParallel)->RangeMultiplier(2)->Range(32, 1024)->Complexity();
BENCHMARK(BM_PairMaxReference)->Range(256, 4096);
BENCHMARK(BM_PairMaxParallel)->Range(256, 4096);

BENCHMARK_MAIN();
