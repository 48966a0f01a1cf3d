#include <benchmark/benchmark.h>

#include "adce/config.hpp"
#include "adce/experiments.hpp"
#include "adce/rates.hpp"

using namespace adce;

namespace {

struct Setup {
  ExperimentConfig config = default_config(Scenario::Fig3c);
  SystemParams params = resolve_params(config.params);
  DressedBasis dressed = scenario_dressed(params, config.regime, 12);
  ModulationSpec spec = resolve_modulation(config, params, dressed);
};

void BM_RateTable(benchmark::State& state) {
  const Setup s;
  const int m_hi = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_rate_table(s.spec, s.dressed, 0, m_hi));
}
BENCHMARK(BM_RateTable)->Arg(4)->Arg(8);

void BM_TransitionRate(benchmark::State& state) {
  const Setup s;
  for (auto _ : state) {
    benchmark::DoNotOptimize(transition_rate(s.spec, s.dressed, s.config.nbar, {4, Label::PlusD, Label::MinusD}));
  }
}
BENCHMARK(BM_TransitionRate);

void BM_SweepPoint(benchmark::State& state) {
  auto c = default_config(Scenario::Sweep);
  c.sweep.axes = {{"delta1_g", {-8.0}}};
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(c));
}
BENCHMARK(BM_SweepPoint)->Unit(benchmark::kMillisecond);

}  // namespace
