#include <gtest/gtest.h>

#include <charconv>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "adce/config.hpp"
#include "adce/csv.hpp"
#include "adce/error.hpp"
#include "json.hpp"

using namespace adce;

TEST(Config, PaperDefaults) {
  const auto c = default_config(Scenario::Fig2a);
  EXPECT_DOUBLE_EQ(c.params.g00, 0.06);
  EXPECT_DOUBLE_EQ(c.params.g01, 1.2 * 0.06);
  EXPECT_DOUBLE_EQ(c.params.delta1, -8 * 0.06);
  EXPECT_DOUBLE_EQ(c.nbar, 1.5);
  EXPECT_EQ(c.m, 4);
  const auto p = resolve_params(c.params);
  EXPECT_NEAR(p.delta2(), -p.delta1(), 1e-15);
}

TEST(Config, DispersiveRuleFollowsSign) {
  ParamsConfig pc;
  pc.rule = Delta2Rule::Dispersive;
  pc.delta1 = -0.3;
  EXPECT_NEAR(resolve_params(pc).delta2(), -6 * pc.g00, 1e-15);
  pc.delta1 = 0.3;
  EXPECT_NEAR(resolve_params(pc).delta2(), 6 * pc.g00, 1e-15);
}

TEST(Config, ScenarioRequired) { EXPECT_THROW(parse_config("{}"), ConfigError); }

TEST(Config, UnknownScenarioListsValidNames) {
  try {
    parse_scenario("fig9");
    FAIL();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    for (auto s : all_scenarios()) EXPECT_NE(what.find(std::string(to_string(s))), std::string::npos);
  }
}

TEST(Config, UnknownKeyRejected) {
  EXPECT_THROW(parse_config(R"({"scenario":"rates","bogus":1})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"scenario":"rates","params":{"g2":1}})"), ConfigError);
}

TEST(Config, WrongTypeRejected) {
  EXPECT_THROW(parse_config(R"({"scenario":"rates","nbar":"many"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"scenario":"rates","m":2.5})"), ConfigError);
}

TEST(Config, MalformedJson) { EXPECT_THROW(parse_config("{"), ConfigError); }

TEST(Config, OverridesApply) {
  const auto c = parse_config(R"({"scenario":"simulate","regime":"rr","params":{"g01_g":1.0,"delta1_g":-6,
    "delta2_rule":"opposite"},"nbar":0.5,"numerics":{"t_end":100,"frame":"lab"}})");
  EXPECT_EQ(c.regime, Regime::DoubleResonant);
  EXPECT_DOUBLE_EQ(c.params.g01, 0.06);
  EXPECT_DOUBLE_EQ(c.params.delta1, -0.36);
  EXPECT_DOUBLE_EQ(c.nbar, 0.5);
  EXPECT_EQ(c.numerics.frame, Frame::Lab);
}

TEST(Config, ToneNeedsExactlyOneFrequencySource) {
  EXPECT_THROW(parse_config(R"({"scenario":"rates","modulation":{"E1":{"depth":0.05,"tones":[{}]}}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"scenario":"rates","modulation":{"E1":{"depth":0.05,"tones":[
    {"frequency":2.0,"resonance":{"m":4,"upper":"D","lower":"-D"}}]}}})"),
               ConfigError);
}

TEST(Config, WeightsMustSumToOne) {
  EXPECT_THROW(parse_config(R"({"scenario":"rates","modulation":{"E1":{"depth":0.05,"tones":[
    {"frequency":2.0,"weight":0.5},{"frequency":2.1,"weight":0.4}]}}})"),
               ConfigError);
}

TEST(Config, QubitRegimeNeedsZeroSecondCoupling) {
  EXPECT_THROW(parse_config(R"({"scenario":"simulate","regime":"2l","params":{"g01":0.01}})"), ConfigError);
}

TEST(Config, SweepLimitedToTwoAxes) {
  EXPECT_THROW(parse_config(R"({"scenario":"sweep","sweep":{"axes":[
    {"name":"delta1_g","values":[1]},{"name":"nbar","values":[1]},{"name":"depth_scale","values":[1]}]}})"),
               ConfigError);
  EXPECT_THROW(parse_config(R"({"scenario":"sweep","sweep":{"axes":[{"name":"g","values":[1]}]}})"), ConfigError);
}

TEST(Config, SweepLinspace) {
  const auto c = parse_config(R"({"scenario":"sweep","sweep":{"axes":[{"name":"nbar","start":0,"stop":1,"count":5}]}})");
  ASSERT_EQ(c.sweep.axes.size(), 1u);
  EXPECT_EQ(c.sweep.axes[0].values, (std::vector<double>{0, 0.25, 0.5, 0.75, 1}));
}

TEST(Config, CanonicalRoundTrip) {
  for (Scenario s : all_scenarios()) {
    const auto c = default_config(s);
    const std::string text = to_json(c);
    EXPECT_EQ(to_json(parse_config(text)), text) << to_string(s);
  }
}

TEST(Config, SchemaIsJson) {
  const auto schema = nlohmann::json::parse(config_schema());
  EXPECT_TRUE(schema.contains("properties"));
  EXPECT_TRUE(schema["properties"].contains("scenario"));
}

TEST(Config, GitBlobHash) {
  // Oracle values from `git hash-object`.
  EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(Csv, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1e-12), "1e-12");
  EXPECT_EQ(format_double(0.0), "0");
  EXPECT_EQ(format_double(-0.0), "-0");
  EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng) * std::pow(10.0, int(rng() % 40) - 20);
    const std::string s = format_double(x);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    ASSERT_EQ(back, x) << s;
  }
}

TEST(Csv, HeaderCarriesUnits) {
  Table t({{"t", "1/omega0"}, {"label", "-"}, {"ok", "bool"}, {"n", "-"}});
  t.add_row({0.5, std::string("a,b"), true, 3LL});
  EXPECT_EQ(to_csv(t), "t[1/omega0],label[-],ok[bool],n[-]\n0.5,\"a,b\",1,3\n");
  EXPECT_THROW(t.add_row({1.0}), InvalidArgument);
  EXPECT_DOUBLE_EQ(t.number(0, "t"), 0.5);
}

TEST(Csv, TimeSeriesTable) {
  TimeSeries ts;
  ts.times = {0.0, 10.0};
  ts.add_column("n_tot", "1").values = {1.5, 1.4};
  const auto t = to_table(ts, 0.06);
  EXPECT_EQ(to_csv(t), "t[1/omega0],t_g[1/G00],n_tot[1]\n0,0,1.5\n10,0.6,1.4\n");
}
