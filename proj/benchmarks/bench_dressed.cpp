#include <benchmark/benchmark.h>

#include "adce/dressed.hpp"

using namespace adce;

namespace {

const SystemParams kParams = SystemParams::from_detunings(0.06, 0.072, -0.48, 0.48);

void BM_DressedNumeric(benchmark::State& state) {
  const int m_max = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(dressed_numeric(kParams, m_max, Regime::DoubleResonant));
}
BENCHMARK(BM_DressedNumeric)->Arg(8)->Arg(32)->Arg(64);

void BM_DressedAnalytic(benchmark::State& state) {
  const int m_max = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(dressed_analytic(kParams, Regime::DoubleResonant, m_max));
}
BENCHMARK(BM_DressedAnalytic)->Arg(8)->Arg(32)->Arg(64);

void BM_NuCorrections(benchmark::State& state) {
  const auto d = dressed_numeric(kParams, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(nu_corrections(d));
}
BENCHMARK(BM_NuCorrections)->Arg(8)->Arg(64);

}  // namespace
