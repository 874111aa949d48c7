#include <benchmark/benchmark.h>

#include "devtree/deterministic.hpp"
#include "devtree/jump.hpp"
#include "devtree/model.hpp"
#include "devtree/stochastic.hpp"

namespace {

using namespace devtree;

TraitCatalog ladder_catalog(int n) {
  TraitCatalog cat;
  for (int i = 0; i < n; ++i)
    cat.traits.push_back({"x" + std::to_string(i), 3.0 + 2.0 * i, 0.0, 1.0});
  const std::size_t L = cat.size();
  cat.alpha0.assign(L * L, 0.0);
  cat.migration.assign(L * L, 0.0);
  for (std::size_t x = 0; x < L; ++x)
    for (std::size_t y = 0; y < L; ++y) {
      const auto dxy = x > y ? x - y : y - x;
      if (dxy <= 1) cat.alpha0[x * L + y] = 1.0;
      if (dxy == 1) cat.migration[x * L + y] = 0.5;
    }
  return cat;
}

void BM_EngineEvent(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto cat = ladder_catalog(n);
  ScalingRegime regime;
  regime.K = 1000.0;
  regime.epsilon = 0.004;
  regime.sigma = 0.0;
  Configuration initial(cat.size(), 0.0);
  initial[0] = 3.0;
  std::uint64_t events = 0;
  SimEngine engine(cat, regime, initial_state(cat, regime, initial, {}), 42);
  for (auto _ : state) {
    if (!engine.advance()) {
      state.SkipWithError("absorbed");
      break;
    }
    ++events;
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(events));
}
BENCHMARK(BM_EngineEvent)->Arg(3)->Arg(5)->Arg(8);

void BM_TstTransition(benchmark::State& state) {
  const auto cat = ladder_catalog(6);
  TstConfiguration cfg = tst_initial(cat, 0);
  for (int m = 1; m < 5; ++m) cfg = tst_transition(cat, cfg, m);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tst_transition(cat, cfg, 5));
  }
}
BENCHMARK(BM_TstTransition);

void BM_Integrate(benchmark::State& state) {
  const auto cat = ladder_catalog(4);
  const auto sys = nearest_neighbor_system(cat, 0.004, true);
  std::vector<double> y0(cat.size(), 0.0);
  y0[0] = 3.0;
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(0.1 * i);
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate(sys, y0, grid));
  }
}
BENCHMARK(BM_Integrate);

} // namespace

BENCHMARK_MAIN();
