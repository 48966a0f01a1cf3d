#include <benchmark/benchmark.h>

#include "adce/config.hpp"
#include "adce/effective.hpp"
#include "adce/exact.hpp"
#include "adce/experiments.hpp"

using namespace adce;

namespace {

struct Setup {
  ExperimentConfig config = default_config(Scenario::Fig3c);
  SystemParams params = resolve_params(config.params);
  DressedBasis dressed = scenario_dressed(params, config.regime, 12);
  ModulationSpec spec = resolve_modulation(config, params, dressed);
};

// Exact RK4 propagation of |0,4> over 100/omega0 in each frame.
void BM_ExactPropagation(benchmark::State& state) {
  const Setup s;
  const Basis basis(static_cast<int>(state.range(0)));
  const auto frame = static_cast<Frame>(state.range(1));
  const Propagator prop(s.params, s.spec, basis, frame);
  PropagationControls c;
  c.t_end = 100.0;
  c.dt_out = 10.0;
  c.frame = frame;
  const auto psi = fock_state(basis, 0, 4);
  for (auto _ : state) benchmark::DoNotOptimize(prop.run(psi, c));
}
BENCHMARK(BM_ExactPropagation)
    ->Args({12, static_cast<int>(Frame::Interaction)})
    ->Args({20, static_cast<int>(Frame::Interaction)})
    ->Args({12, static_cast<int>(Frame::Lab)})
    ->Unit(benchmark::kMillisecond);

void BM_EffectivePropagation(benchmark::State& state) {
  const Setup s;
  const auto rates = build_rate_table(s.spec, s.dressed, 0, 8);
  const std::size_t i = s.dressed.index_of(4, Label::PlusD);
  const auto system = build_effective_system(rates, s.dressed, 0, 8, {{{4, i}, {1.0, 0.0}}});
  EffectiveControls c;
  c.t_end = 1000.0;
  c.dt_out = 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(integrate_effective(system, c));
}
BENCHMARK(BM_EffectivePropagation)->Unit(benchmark::kMillisecond);

}  // namespace
