#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>

#include "vrm/diffusion.hpp"
#include "vrm/fixed_lu.hpp"
#include "vrm/spatial_index.hpp"
#include "vrm/stencil_solver.hpp"

namespace {

using namespace vrm;

// Jittered lattice with a Gaussian circulation profile, roughly what a heat
// run produces after a few dozen steps.
ParticleCloud lattice(double h, double half_width) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> jitter(-0.2, 0.2);
  std::vector<Vec2> x;
  std::vector<double> g;
  const int n = static_cast<int>(half_width / h);
  for (int i = -n; i <= n; ++i) {
    for (int j = -n; j <= n; ++j) {
      const Vec2 p{(i + jitter(rng)) * h, (j + jitter(rng)) * h};
      x.push_back(p);
      g.push_back(h * h * std::exp(-norm2(p) / 0.1));
    }
  }
  return {x, g};
}

void stencil_build(benchmark::State& state, bool try_small) {
  const double h = 0.04 / static_cast<double>(state.range(0));
  const ParticleCloud cloud = lattice(h, 0.6);
  const SpatialIndex index(cloud.positions(), {h, 0.5, 2.0});
  const auto ex = select_excluded(cloud.circulations(), h, 1, 1.0);
  DiffusionSettings s{1, 0.02, 1.0, try_small, 1};
  s.fallback_budget_factor = std::numeric_limits<double>::infinity();
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_operator(index, cloud.circulations(), ex, s));
  }
  state.counters["N"] = static_cast<double>(cloud.size());
  state.SetComplexityN(static_cast<benchmark::IterationCount>(cloud.size()));
}

void BM_StencilSmall(benchmark::State& state) { stencil_build(state, true); }
void BM_StencilFull(benchmark::State& state) { stencil_build(state, false); }
BENCHMARK(BM_StencilSmall)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->Complexity();
BENCHMARK(BM_StencilFull)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->Complexity();

void BM_SimplexRing(benchmark::State& state) {
  std::vector<Vec2> d;
  const int m = static_cast<int>(state.range(0));
  for (int k = 0; k < m; ++k) {
    const double a = 2 * std::numbers::pi * (k + 0.3) / m;
    const double r = 0.7 + 0.9 * ((k * 37) % 11) / 11.0;
    d.push_back({r * std::cos(a), r * std::sin(a)});
  }
  const auto sys = assemble_offsets(d, 1.0, 3);
  for (auto _ : state) benchmark::DoNotOptimize(solve_nonnegative(sys));
}
BENCHMARK(BM_SimplexRing)->Arg(8)->Arg(16)->Arg(32)->Arg(64);

template <int M>
void BM_FixedLu(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  typename FixedLu<M>::Matrix a;
  typename FixedLu<M>::Vector b;
  for (auto& v : a) v = u(rng);
  for (auto& v : b) v = u(rng);
  for (auto _ : state) {
    FixedLu<M> lu;
    benchmark::DoNotOptimize(lu.factor(a));
    benchmark::DoNotOptimize(lu.solve(b));
  }
}
BENCHMARK(BM_FixedLu<5>);
BENCHMARK(BM_FixedLu<9>);
BENCHMARK(BM_FixedLu<14>);

}  // namespace
