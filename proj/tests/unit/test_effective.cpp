#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "adce/config.hpp"
#include "adce/effective.hpp"
#include "adce/error.hpp"
#include "adce/experiments.hpp"
#include "adce/rates.hpp"

using namespace adce;

namespace {

// Two states with a constant Theta-type coupling and detuning delta.
EffectiveSystem rabi_pair(Complex theta, double delta) {
  EffectiveSystem s;
  s.ladder = {{4, 0}, {2, 0}};
  s.names = {"P(4,a)", "P(2,b)"};
  s.lambda_tilde = {delta, 0.0};
  s.excitation = {4.0, 2.0};
  s.couplings = {{0, 1, theta, 0.0, kNoTone, 0}, {1, 0, -std::conj(theta), 0.0, kNoTone, 0}};
  s.initial = Eigen::VectorXcd::Zero(2);
  s.initial(0) = 1.0;
  return s;
}

double column_max(const TimeSeries& ts, const std::string& name) {
  const auto& v = ts.find(name)->values;
  return *std::max_element(v.begin(), v.end());
}

struct Fig4Setup {
  ExperimentConfig config = default_config(Scenario::Fig4);
  SystemParams params = resolve_params(config.params);
  DressedBasis dressed = scenario_dressed(params, config.regime, 12);
  ModulationSpec spec = resolve_modulation(config, params, dressed);
  RateTable rates = build_rate_table(spec, dressed, 0, 8);
};

}  // namespace

TEST(Effective, ResonantPairFullTransfer) {
  const double theta = 1e-3;
  const auto sys = rabi_pair({theta, 0.0}, 0.0);
  EffectiveControls c;
  c.t_end = std::numbers::pi / theta;
  c.dt_out = c.t_end / 100;
  const auto ts = integrate_effective(sys, c);
  const auto& lower = ts.find("P(2,b)")->values;
  EXPECT_NEAR(lower[50], 1.0, 1e-8);
  EXPECT_NEAR(lower[100], 0.0, 1e-8);
  EXPECT_NEAR(lower[25], 0.5, 1e-8);
}

TEST(Effective, DetunedPairBounded) {
  const double theta = 1e-3;
  const double delta = 10 * theta;
  const auto ts = integrate_effective(rabi_pair({0.0, theta}, delta), {2000.0, 1.0});
  const double bound = theta * theta / (theta * theta + delta * delta / 4);
  EXPECT_LE(column_max(ts, "P(2,b)"), bound + 1e-6);
  EXPECT_GE(column_max(ts, "P(2,b)"), 0.9 * bound);
  EXPECT_LE(bound, 0.05);
}

TEST(Effective, NTotTracksExcitation) {
  const auto ts = integrate_effective(rabi_pair({1e-3, 0.0}, 0.0), {std::numbers::pi / 2e-3, std::numbers::pi / 2e-1});
  EXPECT_NEAR(ts.find("n_tot")->values.front(), 4.0, 1e-12);
  EXPECT_NEAR(ts.find("n_tot")->values.back(), 2.0, 1e-6);
}

TEST(Effective, InvalidControls) {
  EXPECT_THROW(integrate_effective(rabi_pair({1e-3, 0.0}, 0.0), {0.0, 1.0}), InvalidArgument);
  EXPECT_THROW(integrate_effective(rabi_pair({1e-3, 0.0}, 0.0), {10.0, 0.0}), InvalidArgument);
}

TEST(Effective, Fig4CoreIsThreeStates) {
  Fig4Setup f;
  const auto sys = build_effective_system(f.rates, f.dressed, 2, 6, {{{4, f.dressed.index_of(4, Label::PlusD)}, 1.0}});
  std::set<std::pair<std::string, std::string>> resonant;
  for (const auto& c : sys.couplings) {
    if (c.tone == kNoTone || std::abs(c.omega) > 2e-4) continue;
    resonant.insert({sys.names[c.i], sys.names[c.j]});
  }
  const std::set<std::pair<std::string, std::string>> expected{{"P(4,+D)", "P(2,-D)"}, {"P(2,-D)", "P(4,+D)"},
                                                               {"P(4,0)", "P(2,-D)"}, {"P(2,-D)", "P(4,0)"}};
  EXPECT_EQ(resonant, expected);
}

TEST(Effective, NoModulationLeavesOnlySigma) {
  Fig4Setup f;
  const auto rates = build_rate_table(ModulationSpec{}, f.dressed, 0, 8);
  const auto sys = build_effective_system(rates, f.dressed, 2, 6, {{{4, 0}, 1.0}});
  ASSERT_FALSE(sys.couplings.empty());
  for (const auto& c : sys.couplings) {
    EXPECT_EQ(c.tone, kNoTone);
    EXPECT_EQ(sys.excitation[c.i], sys.excitation[c.j]);
  }
}

TEST(Effective, SingleParityLadder) {
  Fig4Setup f;
  const auto sys = build_effective_system(f.rates, f.dressed, 1, 7, {{{3, 0}, 1.0}});
  for (double m : sys.excitation) EXPECT_EQ(int(m) % 2, 1);
}

TEST(Effective, InitialOutsideLadderThrows) {
  Fig4Setup f;
  EXPECT_THROW(build_effective_system(f.rates, f.dressed, 2, 6, {{{3, 0}, 1.0}}), InvalidArgument);
}

TEST(Effective, Fig3cNormDrift) {
  auto config = default_config(Scenario::Fig3c);
  config.numerics.exact = false;
  const auto bundle = run_scenario(config);
  const auto& t = bundle.table("effective");
  const std::size_t col = t.column_index("norm");
  const double first = t.number(0, "norm");
  double drift = 0.0;
  for (std::size_t r = 0; r < t.rows().size(); ++r) drift = std::max(drift, std::abs(std::get<double>(t.rows()[r][col]) - first));
  EXPECT_LE(drift, 1e-8);
}

TEST(EffectiveProperties, WeightBalancing) {
  // The paper's 10/17 : 7/17 split is meant to equalize the two channels.
  // With the rate formula as printed the channels are already equal per
  // unit weight, so the split leaves them unbalanced by about 10/7.
  const auto config = default_config(Scenario::Fig3b);
  const auto params = resolve_params(config.params);
  const auto dressed = scenario_dressed(params, config.regime, 10);
  const auto spec = resolve_modulation(config, params, dressed);
  const auto zero = transition_rate(spec, dressed, config.nbar, {4, Label::Zero, Label::MinusD});
  const auto bright = transition_rate(spec, dressed, config.nbar, {4, Label::PlusD, Label::MinusD});
  const double per_weight = (std::abs(zero.theta) / (10.0 / 17)) / (std::abs(bright.theta) / (7.0 / 17));
  EXPECT_NEAR(per_weight, 1.0, 0.05);
  EXPECT_NEAR(std::abs(zero.theta) / std::abs(bright.theta), 10.0 / 7.0 * per_weight, 1e-12);
}
