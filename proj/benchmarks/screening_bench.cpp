#include <benchmark/benchmark.h>

#include "sdna/scenario.hpp"

namespace {

using namespace sdna;

// End-to-end screened order over the simulated network, world setup excluded.
void BM_ScreenOrder(benchmark::State& state) {
  scenario::Config cfg;
  cfg.backend = group::Backend::Prod;
  cfg.variant = state.range(1) ? scep::Variant::ScepPlus : scep::Variant::Scep;
  cfg.rate_limit = UINT64_MAX;
  scenario::World w(cfg, 6);
  w.synthesizer().connect();
  std::vector<Bytes> order;
  for (int i = 0; i < state.range(0); ++i) order.push_back(scenario::fixture_clear(static_cast<std::size_t>(i)));
  order.push_back(scenario::fixture_hazard(0));
  for (auto _ : state) benchmark::DoNotOptimize(w.synthesizer().basic_query(order));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(order.size()));
}
BENCHMARK(BM_ScreenOrder)->Args({9, 0})->Args({99, 0})->Args({99, 1});

void BM_MitmScenario(benchmark::State& state) {
  scenario::Config cfg;
  for (auto _ : state) benchmark::DoNotOptimize(scenario::attack_mitm(cfg, 7));
}
BENCHMARK(BM_MitmScenario);

}  // namespace
