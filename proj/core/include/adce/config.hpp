#pragma once

// Experiment configuration: one JSON document describes one reproducible run.
// Scenario defaults are prefilled and every field present in the document
// overrides them.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adce/dressed.hpp"
#include "adce/exact.hpp"
#include "adce/hilbert.hpp"

namespace adce {

inline constexpr int kSchemaVersion = 1;

enum class Scenario { Fig1, Fig2a, Fig2b, Fig3a, Fig3b, Fig3c, Fig4, Sweep, Simulate, Rates, Dressed };

std::string_view to_string(Scenario scenario);
/// Throws ConfigError listing the valid scenario names.
Scenario parse_scenario(std::string_view name);
const std::vector<Scenario>& all_scenarios();
bool is_figure(Scenario scenario);

/// How delta2 follows delta1 when delta1 is swept.
enum class Delta2Rule { Fixed, Opposite, Zero, Dispersive };

struct ParamsConfig {
  double g00 = 0.06;
  double g01 = 0.072;
  double delta1 = -0.48;
  double delta2 = 0.48;
  Delta2Rule rule = Delta2Rule::Fixed;
};

/// Applies the delta2 rule and builds the physical parameters.
SystemParams resolve_params(const ParamsConfig& config);

/// Transition |phi_{m,upper}> -> |phi_{m-2,lower}>.
struct TransitionRef {
  int m = 4;
  Label upper = Label::PlusD;
  Label lower = Label::MinusD;
};
std::string to_string(const TransitionRef& t);

struct ToneConfig {
  double frequency = 0.0;                 // used when `resonance` is empty
  std::optional<TransitionRef> resonance;  // eta = lambda_tilde difference of this transition
  double offset = 0.0;                     // added to the resolved frequency
  double weight = 1.0;
  double phase = 0.0;
};

struct TargetConfig {
  double depth = 0.0;
  bool relative = false;  // depth is a fraction of Omega01 (E1), Omega12 (E2) or G_{0,k} (Gk)
  std::vector<ToneConfig> tones;
};

struct SweepAxis {
  std::string name;  // delta1_g, eta_offset, depth_scale or nbar
  std::vector<double> values;
};

enum class SweepCompute { Rates, Exact };

struct SweepConfig {
  std::vector<SweepAxis> axes;
  SweepCompute compute = SweepCompute::Rates;
};

struct NumericsConfig {
  int n_max = 0;          // 0: thermal cutoff + 4
  double tail_tol = 1e-6;
  double t_end = 0.0;     // 0: 1.5 predicted transfer periods
  int samples = 400;      // output intervals when dt_out is automatic
  double dt_out = 0.0;    // 0: t_end / samples
  double step_factor = 0.1;
  double fixed_step = 0.0;
  double norm_tol = 1e-8;
  int max_refinements = 4;
  double leakage_tol = 1e-6;
  Frame frame = Frame::Interaction;
  bool exact = true;
  bool effective = true;
  int m_max = 8;  // largest subspace listed by the dressed scenario
};

struct OutputConfig {
  std::string dir = ".";
  std::string prefix;  // empty: scenario name
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  Scenario scenario = Scenario::Simulate;
  Regime regime = Regime::TwoLevel;
  ParamsConfig params;
  std::array<TargetConfig, 4> modulation{};  // indexed by Target
  double nbar = 1.5;
  int m = 4;
  std::vector<TransitionRef> transitions;           // summarized by rates and sweep
  std::vector<std::pair<int, Label>> states;        // dressed populations to record
  SweepConfig sweep;
  NumericsConfig numerics;
  OutputConfig output;

  TargetConfig& target(Target t) { return modulation[static_cast<std::size_t>(t)]; }
  const TargetConfig& target(Target t) const { return modulation[static_cast<std::size_t>(t)]; }
  std::string prefix() const;
};

/// Paper parameters for a scenario: G00 = 0.06, G01 = 1.2 G00, nbar = 1.5,
/// m = 4, delta1 = -delta2 = -8 G00.
ExperimentConfig default_config(Scenario scenario);

/// Parses a JSON document over the scenario defaults. Unknown keys, wrong
/// types and out-of-range values throw ConfigError.
ExperimentConfig parse_config(std::string_view json_text);
/// Checks cross-field invariants; throws ConfigError.
void validate(const ExperimentConfig& config);

/// Canonical JSON rendering of a resolved configuration. Parsing it back
/// yields an equal configuration.
std::string to_json(const ExperimentConfig& config);

/// JSON Schema describing the configuration document.
std::string_view config_schema();

/// Git blob hash: SHA-1 over "blob <size>\0" followed by the content.
std::string git_blob_hash(std::string_view content);

}  // namespace adce
