#include <benchmark/benchmark.h>

#include <random>

#include "vrm/velocity.hpp"

namespace {

using namespace vrm;

struct Sources {
  std::vector<Vec2> x;
  std::vector<double> g;
};

Sources random_sources(std::size_t n) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Sources s;
  for (std::size_t i = 0; i < n; ++i) {
    s.x.push_back({u(rng), u(rng)});
    s.g.push_back(u(rng));
  }
  return s;
}

constexpr double kEps = 0.02;

void BM_VelocityDirect(benchmark::State& state) {
  const auto s = random_sources(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(velocity_direct(s.x, s.g, s.x, kEps, 1));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_VelocityDirect)->RangeMultiplier(4)->Range(1 << 10, 1 << 14)->Unit(benchmark::kMillisecond)->Complexity();

void BM_VelocityTreecode(benchmark::State& state) {
  const auto s = random_sources(static_cast<std::size_t>(state.range(0)));
  const TreecodeParams p;
  for (auto _ : state) benchmark::DoNotOptimize(velocity_treecode(s.x, s.g, s.x, kEps, p, 1));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_VelocityTreecode)->RangeMultiplier(4)->Range(1 << 10, 1 << 16)->Unit(benchmark::kMillisecond)->Complexity();

}  // namespace

BENCHMARK_MAIN();
