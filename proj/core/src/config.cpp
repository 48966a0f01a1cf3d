#include "adce/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <set>

#include "adce/error.hpp"
#include "json.hpp"

namespace adce {

namespace {

using Json = nlohmann::ordered_json;

constexpr double kG00 = 0.06;

struct NamedScenario {
  Scenario scenario;
  const char* name;
};

constexpr NamedScenario kScenarioNames[] = {
    {Scenario::Fig1, "fig1"},         {Scenario::Fig2a, "fig2a"},   {Scenario::Fig2b, "fig2b"},
    {Scenario::Fig3a, "fig3a"},       {Scenario::Fig3b, "fig3b"},   {Scenario::Fig3c, "fig3c"},
    {Scenario::Fig4, "fig4"},         {Scenario::Sweep, "sweep"},   {Scenario::Simulate, "simulate"},
    {Scenario::Rates, "rates"},       {Scenario::Dressed, "dressed"},
};

std::string_view to_string(Delta2Rule rule) {
  switch (rule) {
    case Delta2Rule::Fixed: return "fixed";
    case Delta2Rule::Opposite: return "opposite";
    case Delta2Rule::Zero: return "zero";
    case Delta2Rule::Dispersive: return "dispersive";
  }
  return "fixed";
}

Delta2Rule parse_rule(const std::string& name) {
  for (Delta2Rule r : {Delta2Rule::Fixed, Delta2Rule::Opposite, Delta2Rule::Zero, Delta2Rule::Dispersive}) {
    if (to_string(r) == name) return r;
  }
  throw ConfigError("params.delta2_rule: unknown rule '" + name + "' (expected fixed, opposite, zero, dispersive)");
}

Frame parse_frame(const std::string& name) {
  for (Frame f : {Frame::Interaction, Frame::Dressed, Frame::Lab}) {
    if (to_string(f) == name) return f;
  }
  throw ConfigError("numerics.frame: unknown frame '" + name + "' (expected interaction, dressed, lab)");
}

std::string_view to_string(SweepCompute c) { return c == SweepCompute::Rates ? "rates" : "exact"; }

// Strict object reader: every key must be consumed or listed as allowed.
void check_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& item : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; });
    if (!known) throw ConfigError(path + ": unknown key '" + item.key() + "'");
  }
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

bool read_number(const Json& obj, const char* key, const std::string& path, double& out) {
  if (!obj.contains(key)) return false;
  const Json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(join(path, key) + ": expected a number");
  out = v.get<double>();
  if (!std::isfinite(out)) throw ConfigError(join(path, key) + ": must be finite");
  return true;
}

bool read_int(const Json& obj, const char* key, const std::string& path, int& out) {
  if (!obj.contains(key)) return false;
  const Json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(join(path, key) + ": expected an integer");
  out = v.get<int>();
  return true;
}

bool read_bool(const Json& obj, const char* key, const std::string& path, bool& out) {
  if (!obj.contains(key)) return false;
  const Json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(join(path, key) + ": expected true or false");
  out = v.get<bool>();
  return true;
}

bool read_string(const Json& obj, const char* key, const std::string& path, std::string& out) {
  if (!obj.contains(key)) return false;
  const Json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(join(path, key) + ": expected a string");
  out = v.get<std::string>();
  return true;
}

Label read_label(const Json& obj, const char* key, const std::string& path) {
  std::string s;
  if (!read_string(obj, key, path, s)) throw ConfigError(join(path, key) + ": required");
  try {
    return parse_label(s);
  } catch (const InvalidArgument& e) {
    throw ConfigError(join(path, key) + ": " + e.what());
  }
}

TransitionRef read_transition(const Json& obj, const std::string& path) {
  check_keys(obj, path, {"m", "upper", "lower"});
  TransitionRef t;
  if (!read_int(obj, "m", path, t.m)) throw ConfigError(path + ".m: required");
  t.upper = read_label(obj, "upper", path);
  t.lower = read_label(obj, "lower", path);
  return t;
}

Json transition_json(const TransitionRef& t) {
  return Json{{"m", t.m}, {"upper", std::string(to_string(t.upper))}, {"lower", std::string(to_string(t.lower))}};
}

void read_params(const Json& obj, ParamsConfig& p) {
  const std::string path = "params";
  check_keys(obj, path, {"g00", "g01", "g01_g", "delta1", "delta1_g", "delta2", "delta2_g", "delta2_rule"});
  read_number(obj, "g00", path, p.g00);
  if (obj.contains("g01") && obj.contains("g01_g")) throw ConfigError("params: give g01 or g01_g, not both");
  if (obj.contains("delta1") && obj.contains("delta1_g")) throw ConfigError("params: give delta1 or delta1_g, not both");
  if (obj.contains("delta2") && obj.contains("delta2_g")) throw ConfigError("params: give delta2 or delta2_g, not both");
  double v = 0.0;
  read_number(obj, "g01", path, p.g01);
  if (read_number(obj, "g01_g", path, v)) p.g01 = v * p.g00;
  read_number(obj, "delta1", path, p.delta1);
  if (read_number(obj, "delta1_g", path, v)) p.delta1 = v * p.g00;
  read_number(obj, "delta2", path, p.delta2);
  if (read_number(obj, "delta2_g", path, v)) p.delta2 = v * p.g00;
  std::string rule;
  if (read_string(obj, "delta2_rule", path, rule)) p.rule = parse_rule(rule);
}

void read_modulation(const Json& obj, ExperimentConfig& c) {
  check_keys(obj, "modulation", {"E1", "E2", "G0", "G1"});
  // A present modulation object replaces the scenario default entirely.
  for (auto& t : c.modulation) t = TargetConfig{};
  for (const auto& item : obj.items()) {
    const std::string path = "modulation." + item.key();
    const Json& m = item.value();
    check_keys(m, path, {"depth", "depth_rel", "tones"});
    TargetConfig& tc = c.target(parse_target(item.key()));
    if (m.contains("depth") && m.contains("depth_rel")) throw ConfigError(path + ": give depth or depth_rel, not both");
    read_number(m, "depth", path, tc.depth);
    if (read_number(m, "depth_rel", path, tc.depth)) tc.relative = true;
    if (m.contains("tones")) {
      const Json& tones = m.at("tones");
      if (!tones.is_array()) throw ConfigError(path + ".tones: expected an array");
      for (std::size_t j = 0; j < tones.size(); ++j) {
        const std::string tp = path + ".tones[" + std::to_string(j) + "]";
        const Json& tj = tones[j];
        check_keys(tj, tp, {"frequency", "resonance", "offset", "weight", "phase"});
        ToneConfig tone;
        const bool has_freq = read_number(tj, "frequency", tp, tone.frequency);
        if (tj.contains("resonance")) tone.resonance = read_transition(tj.at("resonance"), tp + ".resonance");
        if (has_freq == tone.resonance.has_value()) throw ConfigError(tp + ": give exactly one of frequency, resonance");
        read_number(tj, "offset", tp, tone.offset);
        read_number(tj, "weight", tp, tone.weight);
        read_number(tj, "phase", tp, tone.phase);
        tc.tones.push_back(tone);
      }
    }
  }
}

std::vector<double> read_axis_values(const Json& a, const std::string& path) {
  if (a.contains("values")) {
    if (a.contains("start") || a.contains("stop") || a.contains("count")) {
      throw ConfigError(path + ": give values or start/stop/count, not both");
    }
    const Json& v = a.at("values");
    if (!v.is_array() || v.empty()) throw ConfigError(path + ".values: expected a non-empty array");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigError(path + ".values: expected numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }
  double start = 0.0;
  double stop = 0.0;
  int count = 0;
  if (!read_number(a, "start", path, start) || !read_number(a, "stop", path, stop) ||
      !read_int(a, "count", path, count)) {
    throw ConfigError(path + ": expected values or start, stop and count");
  }
  if (count < 1) throw ConfigError(path + ".count: must be >= 1");
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(count == 1 ? start : start + (stop - start) * static_cast<double>(i) / (count - 1));
  }
  return out;
}

void read_sweep(const Json& obj, SweepConfig& s) {
  check_keys(obj, "sweep", {"axes", "compute"});
  std::string compute;
  if (read_string(obj, "compute", "sweep", compute)) {
    if (compute == "rates") {
      s.compute = SweepCompute::Rates;
    } else if (compute == "exact") {
      s.compute = SweepCompute::Exact;
    } else {
      throw ConfigError("sweep.compute: expected rates or exact");
    }
  }
  if (obj.contains("axes")) {
    const Json& axes = obj.at("axes");
    if (!axes.is_array()) throw ConfigError("sweep.axes: expected an array");
    s.axes.clear();
    for (std::size_t i = 0; i < axes.size(); ++i) {
      const std::string path = "sweep.axes[" + std::to_string(i) + "]";
      check_keys(axes[i], path, {"name", "values", "start", "stop", "count"});
      SweepAxis axis;
      if (!read_string(axes[i], "name", path, axis.name)) throw ConfigError(path + ".name: required");
      axis.values = read_axis_values(axes[i], path);
      s.axes.push_back(std::move(axis));
    }
  }
}

void read_numerics(const Json& obj, NumericsConfig& n) {
  const std::string path = "numerics";
  check_keys(obj, path,
             {"n_max", "tail_tol", "t_end", "samples", "dt_out", "step_factor", "fixed_step", "norm_tol",
              "max_refinements", "leakage_tol", "frame", "exact", "effective", "m_max"});
  read_int(obj, "n_max", path, n.n_max);
  read_number(obj, "tail_tol", path, n.tail_tol);
  read_number(obj, "t_end", path, n.t_end);
  read_int(obj, "samples", path, n.samples);
  read_number(obj, "dt_out", path, n.dt_out);
  read_number(obj, "step_factor", path, n.step_factor);
  read_number(obj, "fixed_step", path, n.fixed_step);
  read_number(obj, "norm_tol", path, n.norm_tol);
  read_int(obj, "max_refinements", path, n.max_refinements);
  read_number(obj, "leakage_tol", path, n.leakage_tol);
  std::string frame;
  if (read_string(obj, "frame", path, frame)) n.frame = parse_frame(frame);
  read_bool(obj, "exact", path, n.exact);
  read_bool(obj, "effective", path, n.effective);
  read_int(obj, "m_max", path, n.m_max);
}

TargetConfig relative_target(double depth_rel, std::vector<ToneConfig> tones) {
  TargetConfig t;
  t.depth = depth_rel;
  t.relative = true;
  t.tones = std::move(tones);
  return t;
}

ToneConfig resonant_tone(int m, Label upper, Label lower, double weight = 1.0, double phase = 0.0) {
  ToneConfig t;
  t.resonance = TransitionRef{m, upper, lower};
  t.weight = weight;
  t.phase = phase;
  return t;
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace

std::string_view to_string(Scenario scenario) {
  for (const auto& s : kScenarioNames) {
    if (s.scenario == scenario) return s.name;
  }
  return "?";
}

Scenario parse_scenario(std::string_view name) {
  for (const auto& s : kScenarioNames) {
    if (name == s.name) return s.scenario;
  }
  std::string valid;
  for (const auto& s : kScenarioNames) valid += std::string(valid.empty() ? "" : ", ") + s.name;
  throw ConfigError("unknown scenario '" + std::string(name) + "'; valid scenarios: " + valid);
}

const std::vector<Scenario>& all_scenarios() {
  static const std::vector<Scenario> all = [] {
    std::vector<Scenario> v;
    for (const auto& s : kScenarioNames) v.push_back(s.scenario);
    return v;
  }();
  return all;
}

bool is_figure(Scenario s) {
  return s == Scenario::Fig1 || s == Scenario::Fig2a || s == Scenario::Fig2b || s == Scenario::Fig3a ||
         s == Scenario::Fig3b || s == Scenario::Fig3c || s == Scenario::Fig4;
}

SystemParams resolve_params(const ParamsConfig& c) {
  double delta2 = c.delta2;
  switch (c.rule) {
    case Delta2Rule::Fixed: break;
    case Delta2Rule::Opposite: delta2 = -c.delta1; break;
    case Delta2Rule::Zero: delta2 = 0.0; break;
    case Delta2Rule::Dispersive: delta2 = 6.0 * c.g00 * (c.delta1 >= 0.0 ? 1.0 : -1.0); break;
  }
  SystemParams p = SystemParams::from_detunings(c.g00, c.g01, c.delta1, delta2);
  p.validate();
  return p;
}

std::string to_string(const TransitionRef& t) {
  return "(" + std::to_string(t.m) + ":" + std::string(to_string(t.upper)) + "," + std::string(to_string(t.lower)) +
         ")";
}

std::string ExperimentConfig::prefix() const { return output.prefix.empty() ? std::string(to_string(scenario)) : output.prefix; }

ExperimentConfig default_config(Scenario scenario) {
  ExperimentConfig c;
  c.scenario = scenario;
  c.regime = Regime::DoubleResonant;
  c.params = ParamsConfig{kG00, 1.2 * kG00, -8.0 * kG00, 8.0 * kG00, Delta2Rule::Opposite};
  c.nbar = 1.5;
  c.m = 4;
  c.transitions = {{4, Label::PlusD, Label::MinusD}, {4, Label::Zero, Label::MinusD}};
  c.target(Target::E1) = relative_target(0.05, {resonant_tone(4, Label::PlusD, Label::MinusD)});

  const std::vector<ToneConfig> two_tone_e1{resonant_tone(4, Label::Zero, Label::MinusD, 10.0 / 17.0, 0.0),
                                            resonant_tone(4, Label::PlusD, Label::MinusD, 7.0 / 17.0, kPi)};
  const std::vector<ToneConfig> two_tone_e2{resonant_tone(4, Label::Zero, Label::MinusD, 10.0 / 17.0, kPi),
                                            resonant_tone(4, Label::PlusD, Label::MinusD, 7.0 / 17.0, 0.0)};
  switch (scenario) {
    case Scenario::Fig1:
    case Scenario::Fig2a:
      break;
    case Scenario::Fig2b:
      c.target(Target::E2) = relative_target(0.05, {resonant_tone(4, Label::PlusD, Label::MinusD, 1.0, kPi)});
      break;
    case Scenario::Fig3a:
    case Scenario::Simulate:
      c.regime = Regime::TwoLevel;
      c.params = ParamsConfig{kG00, 0.0, -8.0 * kG00, 8.0 * kG00, Delta2Rule::Fixed};
      c.transitions = {{4, Label::PlusD, Label::MinusD}};
      c.states = {{4, Label::PlusD}, {2, Label::MinusD}};
      break;
    case Scenario::Fig3b:
      c.target(Target::E1).tones = two_tone_e1;
      c.states = {{4, Label::PlusD}, {4, Label::Zero}, {2, Label::MinusD}, {3, Label::MinusD}};
      break;
    case Scenario::Fig3c:
    case Scenario::Fig4:
    case Scenario::Rates:
      c.target(Target::E1).tones = two_tone_e1;
      c.target(Target::E2) = relative_target(0.09, two_tone_e2);
      c.states = {{4, Label::PlusD}, {4, Label::Zero}, {2, Label::MinusD}, {3, Label::MinusD}};
      if (scenario == Scenario::Fig4) {
        c.states.clear();
        c.states.push_back({1, Label::PlusD});
        c.states.push_back({1, Label::MinusD});
        for (int m = 2; m <= 6; ++m) {
          for (Label l : {Label::PlusD, Label::Zero, Label::MinusD}) c.states.push_back({m, l});
        }
      }
      break;
    case Scenario::Sweep:
      c.sweep.axes = {{"delta1_g", {}}};
      for (int i = 0; i <= 12; ++i) c.sweep.axes[0].values.push_back(-10.0 + 0.5 * i);
      break;
    case Scenario::Dressed:
      c.target(Target::E1) = TargetConfig{};
      break;
  }
  return c;
}

ExperimentConfig parse_config(std::string_view json_text) {
  Json doc;
  try {
    doc = Json::parse(json_text.begin(), json_text.end());
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  check_keys(doc, "config",
             {"schema_version", "scenario", "regime", "params", "modulation", "nbar", "m", "transitions", "states",
              "sweep", "numerics", "output"});
  int version = kSchemaVersion;
  read_int(doc, "schema_version", "", version);
  if (version != kSchemaVersion) {
    throw ConfigError("schema_version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kSchemaVersion) + ")");
  }
  std::string scenario;
  if (!read_string(doc, "scenario", "", scenario)) throw ConfigError("scenario: required");
  ExperimentConfig c = default_config(parse_scenario(scenario));

  std::string regime;
  if (read_string(doc, "regime", "", regime)) {
    try {
      c.regime = parse_regime(regime);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("regime: ") + e.what());
    }
  }
  try {
    if (doc.contains("params")) read_params(doc.at("params"), c.params);
    if (doc.contains("modulation")) read_modulation(doc.at("modulation"), c);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  read_number(doc, "nbar", "", c.nbar);
  read_int(doc, "m", "", c.m);
  if (doc.contains("transitions")) {
    const Json& t = doc.at("transitions");
    if (!t.is_array()) throw ConfigError("transitions: expected an array");
    c.transitions.clear();
    for (std::size_t i = 0; i < t.size(); ++i) {
      c.transitions.push_back(read_transition(t[i], "transitions[" + std::to_string(i) + "]"));
    }
  }
  if (doc.contains("states")) {
    const Json& s = doc.at("states");
    if (!s.is_array()) throw ConfigError("states: expected an array");
    c.states.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string path = "states[" + std::to_string(i) + "]";
      check_keys(s[i], path, {"m", "label"});
      int m = 0;
      if (!read_int(s[i], "m", path, m)) throw ConfigError(path + ".m: required");
      c.states.push_back({m, read_label(s[i], "label", path)});
    }
  }
  if (doc.contains("sweep")) read_sweep(doc.at("sweep"), c.sweep);
  if (doc.contains("numerics")) read_numerics(doc.at("numerics"), c.numerics);
  if (doc.contains("output")) {
    check_keys(doc.at("output"), "output", {"dir", "prefix"});
    read_string(doc.at("output"), "dir", "output", c.output.dir);
    read_string(doc.at("output"), "prefix", "output", c.output.prefix);
  }
  validate(c);
  return c;
}

void validate(const ExperimentConfig& c) {
  const auto& p = c.params;
  if (!(p.g00 >= 0.0)) throw ConfigError("params.g00 must be >= 0");
  if (!(p.g01 >= 0.0)) throw ConfigError("params.g01 must be >= 0");
  if (c.regime == Regime::TwoLevel && p.g01 != 0.0) throw ConfigError("regime 2L requires params.g01 = 0");
  if (!(c.nbar >= 0.0)) throw ConfigError("nbar must be >= 0");
  if (c.m < 2) throw ConfigError("m must be >= 2");
  try {
    resolve_params(p);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("params: ") + e.what());
  }

  for (Target t : kAllTargets) {
    const auto& tc = c.target(t);
    const std::string path = "modulation." + std::string(to_string(t));
    if (!(tc.depth >= 0.0)) throw ConfigError(path + ".depth must be >= 0");
    if (tc.depth > 0.0 && tc.tones.empty()) throw ConfigError(path + ": a modulated parameter needs tones");
    if (tc.depth == 0.0 && !tc.tones.empty()) throw ConfigError(path + ": tones given for zero depth");
    double weight = 0.0;
    for (const auto& tone : tc.tones) {
      if (!(tone.weight >= 0.0 && tone.weight <= 1.0)) throw ConfigError(path + ": tone weights must lie in [0, 1]");
      if (!tone.resonance && !(tone.frequency > 0.0)) throw ConfigError(path + ": tone frequencies must be > 0");
      if (tone.resonance && tone.resonance->m < 2) throw ConfigError(path + ": resonance m must be >= 2");
      weight += tone.weight;
    }
    if (!tc.tones.empty() && std::abs(weight - 1.0) > 1e-12) throw ConfigError(path + ": tone weights must sum to 1");
    if (tc.relative && (t == Target::G0 || t == Target::G1)) {
      const double g = t == Target::G0 ? p.g00 : p.g01;
      if (tc.depth > 0.0 && g == 0.0) throw ConfigError(path + ": depth_rel needs a nonzero bare coupling");
    }
  }
  for (const auto& [m, label] : c.states) {
    if (m < 0) throw ConfigError("states: m must be >= 0");
    (void)label;
  }
  for (const auto& t : c.transitions) {
    if (t.m < 2) throw ConfigError("transitions: m must be >= 2");
  }
  if ((c.scenario == Scenario::Rates || c.scenario == Scenario::Sweep) && c.transitions.empty()) {
    throw ConfigError("transitions: at least one transition is required");
  }
  if (c.scenario == Scenario::Sweep) {
    if (c.sweep.axes.empty()) throw ConfigError("sweep.axes: at least one axis is required");
    if (c.sweep.axes.size() > 2) {
      throw ConfigError("sweep.axes: grids over more than two axes are rejected (got " +
                        std::to_string(c.sweep.axes.size()) + ")");
    }
    std::set<std::string> seen;
    for (const auto& a : c.sweep.axes) {
      if (a.name != "delta1_g" && a.name != "eta_offset" && a.name != "depth_scale" && a.name != "nbar") {
        throw ConfigError("sweep.axes: unknown axis '" + a.name + "' (expected delta1_g, eta_offset, depth_scale, nbar)");
      }
      if (!seen.insert(a.name).second) throw ConfigError("sweep.axes: axis '" + a.name + "' given twice");
      if (a.values.empty()) throw ConfigError("sweep.axes: axis '" + a.name + "' has no values");
    }
  }
  const auto& n = c.numerics;
  if (n.n_max != 0 && n.n_max < 2) throw ConfigError("numerics.n_max must be 0 (automatic) or >= 2");
  if (!(n.tail_tol > 0.0 && n.tail_tol < 1.0)) throw ConfigError("numerics.tail_tol must lie in (0, 1)");
  if (!(n.t_end >= 0.0)) throw ConfigError("numerics.t_end must be >= 0");
  if (n.samples < 1) throw ConfigError("numerics.samples must be >= 1");
  if (!(n.dt_out >= 0.0)) throw ConfigError("numerics.dt_out must be >= 0");
  if (!(n.step_factor > 0.0)) throw ConfigError("numerics.step_factor must be > 0");
  if (!(n.fixed_step >= 0.0)) throw ConfigError("numerics.fixed_step must be >= 0");
  if (!(n.norm_tol > 0.0)) throw ConfigError("numerics.norm_tol must be > 0");
  if (n.max_refinements < 0) throw ConfigError("numerics.max_refinements must be >= 0");
  if (!(n.leakage_tol > 0.0)) throw ConfigError("numerics.leakage_tol must be > 0");
  if (n.m_max < 1) throw ConfigError("numerics.m_max must be >= 1");
}

std::string to_json(const ExperimentConfig& c) {
  Json doc;
  doc["schema_version"] = c.schema_version;
  doc["scenario"] = std::string(to_string(c.scenario));
  doc["regime"] = std::string(to_string(c.regime));
  doc["params"] = Json{{"g00", c.params.g00},
                       {"g01", c.params.g01},
                       {"delta1", c.params.delta1},
                       {"delta2", c.params.delta2},
                       {"delta2_rule", std::string(to_string(c.params.rule))}};
  Json mod = Json::object();
  for (Target t : kAllTargets) {
    const auto& tc = c.target(t);
    if (tc.depth == 0.0 && tc.tones.empty()) continue;
    Json m;
    m[tc.relative ? "depth_rel" : "depth"] = tc.depth;
    Json tones = Json::array();
    for (const auto& tone : tc.tones) {
      Json tj;
      if (tone.resonance) {
        tj["resonance"] = transition_json(*tone.resonance);
      } else {
        tj["frequency"] = tone.frequency;
      }
      tj["offset"] = tone.offset;
      tj["weight"] = tone.weight;
      tj["phase"] = tone.phase;
      tones.push_back(tj);
    }
    m["tones"] = tones;
    mod[std::string(to_string(t))] = m;
  }
  doc["modulation"] = mod;
  doc["nbar"] = c.nbar;
  doc["m"] = c.m;
  Json transitions = Json::array();
  for (const auto& t : c.transitions) transitions.push_back(transition_json(t));
  doc["transitions"] = transitions;
  Json states = Json::array();
  for (const auto& [m, label] : c.states) states.push_back(Json{{"m", m}, {"label", std::string(to_string(label))}});
  doc["states"] = states;
  Json axes = Json::array();
  for (const auto& a : c.sweep.axes) axes.push_back(Json{{"name", a.name}, {"values", a.values}});
  doc["sweep"] = Json{{"axes", axes}, {"compute", std::string(to_string(c.sweep.compute))}};
  const auto& n = c.numerics;
  doc["numerics"] = Json{{"n_max", n.n_max},
                         {"tail_tol", n.tail_tol},
                         {"t_end", n.t_end},
                         {"samples", n.samples},
                         {"dt_out", n.dt_out},
                         {"step_factor", n.step_factor},
                         {"fixed_step", n.fixed_step},
                         {"norm_tol", n.norm_tol},
                         {"max_refinements", n.max_refinements},
                         {"leakage_tol", n.leakage_tol},
                         {"frame", std::string(to_string(n.frame))},
                         {"exact", n.exact},
                         {"effective", n.effective},
                         {"m_max", n.m_max}};
  doc["output"] = Json{{"dir", c.output.dir}, {"prefix", c.output.prefix}};
  return doc.dump(2) + "\n";
}

std::string git_blob_hash(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + std::string(1, '\0');
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw NumericalFailure("cannot allocate a digest context");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &length) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw NumericalFailure("SHA-1 digest failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < length; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string_view config_schema() {
  static constexpr std::string_view kSchema = R"json({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "adce experiment configuration",
  "type": "object",
  "additionalProperties": false,
  "required": ["scenario"],
  "$defs": {
    "label": {"enum": ["0", "D", "+D", "-D", "1", "2"]},
    "transition": {
      "type": "object",
      "additionalProperties": false,
      "required": ["m", "upper", "lower"],
      "properties": {
        "m": {"type": "integer", "minimum": 2},
        "upper": {"$ref": "#/$defs/label"},
        "lower": {"$ref": "#/$defs/label"}
      }
    },
    "tone": {
      "type": "object",
      "additionalProperties": false,
      "oneOf": [{"required": ["frequency"]}, {"required": ["resonance"]}],
      "properties": {
        "frequency": {"type": "number", "exclusiveMinimum": 0},
        "resonance": {"$ref": "#/$defs/transition"},
        "offset": {"type": "number"},
        "weight": {"type": "number", "minimum": 0, "maximum": 1},
        "phase": {"type": "number"}
      }
    },
    "target": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "depth": {"type": "number", "minimum": 0},
        "depth_rel": {"type": "number", "minimum": 0},
        "tones": {"type": "array", "items": {"$ref": "#/$defs/tone"}}
      }
    },
    "axis": {
      "type": "object",
      "additionalProperties": false,
      "required": ["name"],
      "properties": {
        "name": {"enum": ["delta1_g", "eta_offset", "depth_scale", "nbar"]},
        "values": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "start": {"type": "number"},
        "stop": {"type": "number"},
        "count": {"type": "integer", "minimum": 1}
      }
    }
  },
  "properties": {
    "schema_version": {"const": 1},
    "scenario": {"enum": ["fig1", "fig2a", "fig2b", "fig3a", "fig3b", "fig3c", "fig4", "sweep", "simulate", "rates", "dressed"]},
    "regime": {"enum": ["numeric", "2L", "RR", "DR", "MR"]},
    "params": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "g00": {"type": "number", "minimum": 0},
        "g01": {"type": "number", "minimum": 0},
        "g01_g": {"type": "number", "minimum": 0},
        "delta1": {"type": "number"},
        "delta1_g": {"type": "number"},
        "delta2": {"type": "number"},
        "delta2_g": {"type": "number"},
        "delta2_rule": {"enum": ["fixed", "opposite", "zero", "dispersive"]}
      }
    },
    "modulation": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "E1": {"$ref": "#/$defs/target"},
        "E2": {"$ref": "#/$defs/target"},
        "G0": {"$ref": "#/$defs/target"},
        "G1": {"$ref": "#/$defs/target"}
      }
    },
    "nbar": {"type": "number", "minimum": 0},
    "m": {"type": "integer", "minimum": 2},
    "transitions": {"type": "array", "items": {"$ref": "#/$defs/transition"}},
    "states": {
      "type": "array",
      "items": {
        "type": "object",
        "additionalProperties": false,
        "required": ["m", "label"],
        "properties": {"m": {"type": "integer", "minimum": 0}, "label": {"$ref": "#/$defs/label"}}
      }
    },
    "sweep": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "axes": {"type": "array", "items": {"$ref": "#/$defs/axis"}, "maxItems": 2},
        "compute": {"enum": ["rates", "exact"]}
      }
    },
    "numerics": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "n_max": {"type": "integer", "minimum": 0},
        "tail_tol": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "t_end": {"type": "number", "minimum": 0},
        "samples": {"type": "integer", "minimum": 1},
        "dt_out": {"type": "number", "minimum": 0},
        "step_factor": {"type": "number", "exclusiveMinimum": 0},
        "fixed_step": {"type": "number", "minimum": 0},
        "norm_tol": {"type": "number", "exclusiveMinimum": 0},
        "max_refinements": {"type": "integer", "minimum": 0},
        "leakage_tol": {"type": "number", "exclusiveMinimum": 0},
        "frame": {"enum": ["interaction", "dressed", "lab"]},
        "exact": {"type": "boolean"},
        "effective": {"type": "boolean"},
        "m_max": {"type": "integer", "minimum": 1}
      }
    },
    "output": {
      "type": "object",
      "additionalProperties": false,
      "properties": {"dir": {"type": "string"}, "prefix": {"type": "string"}}
    }
  }
}
)json";
  return kSchema;
}

}  // namespace adce
