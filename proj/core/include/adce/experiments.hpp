#pragma once

// Scenario runner: turns an ExperimentConfig into CSV tables plus metadata.

#include <string>
#include <utility>
#include <vector>

#include "adce/config.hpp"
#include "adce/csv.hpp"
#include "adce/dressed.hpp"
#include "adce/rates.hpp"

namespace adce {

/// Numeric dressed states of subspaces 0..m_max labelled by `regime`, with
/// nu corrections.
DressedBasis scenario_dressed(const SystemParams& params, Regime regime, int m_max);

/// Throws RegimeViolation when the regime's closed forms do not apply to
/// subspaces up to m. Numeric always passes.
void check_regime(const SystemParams& params, Regime regime, int m);
/// Same check returning the failure message (empty on success).
std::string regime_failure(const SystemParams& params, Regime regime, int m);

/// Resolves relative depths and resonance-referenced tone frequencies.
ModulationSpec resolve_modulation(const ExperimentConfig& config, const SystemParams& params,
                                  const DressedBasis& dressed);

struct TransitionRate {
  TransitionRef transition;
  double eta_res = 0.0;
  double population_difference = 0.0;
  Complex theta{0.0, 0.0};
  std::size_t tone = kNoToneIndex;  // fast tone closest to eta_res
  double detuning = 0.0;            // tone frequency - eta_res
  bool rate_ok = false;
  std::string note;

  static constexpr std::size_t kNoToneIndex = static_cast<std::size_t>(-1);
  /// pi / (2 |Theta|), the time to transfer half of the population.
  double half_transfer_time() const;
};

/// Theta of the fast tone nearest to the transition's resonance. Failures of
/// the perturbative formula are reported through rate_ok and note.
TransitionRate transition_rate(const ModulationSpec& spec, const DressedBasis& dressed, double nbar,
                               const TransitionRef& transition);

/// First transfer of an oscillating excitation number.
struct TransferSummary {
  double initial = 0.0;
  double minimum = 0.0;
  double annihilated = 0.0;  // initial - minimum of the smoothed trace
  double t_first_min = 0.0;  // minimum of the first excursion below half of the full drop
  double period = 0.0;       // 2 * t_first_min
};
TransferSummary summarize_transfer(const std::vector<double>& times, const std::vector<double>& values);

struct RunOptions {
  unsigned threads = 1;
};

struct ResultBundle {
  ExperimentConfig config;
  std::string config_json;  // canonical rendering of `config`
  std::string config_hash;  // git blob hash of config_json
  std::vector<std::pair<std::string, Table>> tables;
  std::vector<std::pair<std::string, std::string>> facts;
  std::vector<std::pair<std::string, ConstraintReport>> reports;
  std::vector<std::string> warnings;
  double runtime_seconds = 0.0;

  const Table& table(const std::string& name) const;
  bool has_table(const std::string& name) const;
  std::string fact(const std::string& key) const;
  double number(const std::string& key) const;
};

/// Runs a validated configuration. Sweep points and ensemble members run on
/// up to `threads` workers; results are assembled in a fixed order.
ResultBundle run_scenario(const ExperimentConfig& config, const RunOptions& options = {});

/// Schema-versioned metadata document.
std::string metadata_json(const ResultBundle& bundle, const std::vector<std::string>& files = {});

/// Writes <prefix>_<table>.csv for every table, <prefix>_metadata.json and
/// <prefix>.gp into `dir` (created if missing). Returns the written paths.
std::vector<std::string> write_bundle(const ResultBundle& bundle, const std::string& dir);

}  // namespace adce
