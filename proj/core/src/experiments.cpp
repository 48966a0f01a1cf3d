#include "adce/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "adce/effective.hpp"
#include "adce/error.hpp"
#include "adce/exact.hpp"
#include "adce/parallel.hpp"
#include "adce/plot_script.hpp"
#include "adce/version.hpp"
#include "json.hpp"

namespace adce {

namespace {

using Json = nlohmann::ordered_json;

constexpr double kPi = 3.14159265358979323846;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Ladder half-width of the effective equations around each ensemble member.
constexpr int kLadderReach = 4;

std::string label_of(Label l) { return std::string(to_string(l)); }

double bare_reference(Target t, const SystemParams& p) {
  switch (t) {
    case Target::E1: return p.omega01();
    case Target::E2: return p.omega12();
    case Target::G0: return p.G0[0];
    case Target::G1: return p.G0[1];
  }
  return 1.0;
}

// Index of a labelled state inside its subspace, with a config-level error.
std::size_t state_index(const DressedBasis& dressed, int m, Label label) {
  if (!dressed.has(m)) throw InvalidArgument("subspace m=" + std::to_string(m) + " is not available");
  return dressed.index_of(m, label);
}

// Every tone resonance in `config` redirected at `transition`.
ExperimentConfig retarget(ExperimentConfig config, const TransitionRef& transition) {
  for (auto& tc : config.modulation) {
    for (auto& tone : tc.tones) {
      if (tone.resonance) tone.resonance = transition;
    }
  }
  return config;
}

Table report_table(const ConstraintReport& report) {
  Table t({{"check", "-"}, {"worst", "omega0"}, {"threshold", "omega0"}, {"where", "-"}, {"pass", "bool"}});
  for (const auto& c : report.checks) t.add_row({c.name, c.worst, c.threshold, c.where, c.pass});
  return t;
}

Json report_json(const ConstraintReport& report) {
  Json checks = Json::array();
  for (const auto& c : report.checks) {
    checks.push_back(Json{{"name", c.name},
                          {"worst", format_double(c.worst)},
                          {"threshold", format_double(c.threshold)},
                          {"where", c.where},
                          {"pass", c.pass}});
  }
  return Json{{"all_pass", report.all_pass()}, {"checks", checks}};
}

Table tone_table(const std::vector<DriveTone>& tones, const ToneClass& classes) {
  Table t({{"tone", "-"}, {"frequency", "omega0"}, {"kind", "-"}, {"target", "-"}, {"depth", "omega0"},
           {"weight", "1"}, {"phase", "rad"}});
  for (std::size_t j = 0; j < tones.size(); ++j) {
    for (const auto& c : tones[j].components) {
      t.add_row({static_cast<long long>(j), tones[j].frequency, std::string(to_string(classes.kinds[j])),
                 std::string(to_string(c.target)), c.depth, c.weight, c.phase});
    }
  }
  return t;
}

std::vector<TableColumn> rate_columns() {
  return {{"transition", "-"},   {"eta_res", "omega0"},  {"P", "1"},
          {"theta_abs", "omega0"}, {"theta_re", "omega0"}, {"theta_im", "omega0"},
          {"half_transfer_time", "1/omega0"}, {"tone", "-"}, {"detuning", "omega0"},
          {"rate_ok", "bool"}};
}

std::vector<Cell> rate_cells(const TransitionRate& r) {
  return {to_string(r.transition),
          r.eta_res,
          r.population_difference,
          std::abs(r.theta),
          r.theta.real(),
          r.theta.imag(),
          r.half_transfer_time(),
          r.tone == TransitionRate::kNoToneIndex ? -1LL : static_cast<long long>(r.tone),
          r.detuning,
          r.rate_ok};
}

// Regimes and the delta2 rule that keeps each one on its manifold while
// delta1 is scanned.
struct CurveFamily {
  Regime regime;
  const char* suffix;
  Delta2Rule rule;
  bool qubit;
};

constexpr CurveFamily kFamilies[] = {
    {Regime::TwoLevel, "2L", Delta2Rule::Opposite, true},
    {Regime::DoubleResonant, "r", Delta2Rule::Opposite, false},
    {Regime::Dispersive, "d", Delta2Rule::Dispersive, false},
    {Regime::Mixed, "m", Delta2Rule::Zero, false},
};

std::vector<Label> family_labels(Regime r) {
  switch (r) {
    case Regime::TwoLevel: return {Label::PlusD, Label::MinusD};
    case Regime::Dispersive: return {Label::Zero, Label::One, Label::Two};
    default: return {Label::Zero, Label::PlusD, Label::MinusD};
  }
}

std::string label_short(Label l) { return l == Label::PlusD ? "D" : label_of(l); }

// One point of the Fig. 1 / Fig. 2 curves.
struct CurvePoint {
  TransitionRate rate;
  bool regime_ok = true;
  bool constraints_ok = true;
  std::string tone_kind;
};

CurvePoint evaluate_curve_point(const ExperimentConfig& config, const SystemParams& params, Regime regime,
                                const TransitionRef& transition) {
  CurvePoint out;
  out.regime_ok = regime_failure(params, regime, transition.m).empty();
  const DressedBasis dressed = scenario_dressed(params, regime, transition.m + 4);
  const int m = transition.m;
  const std::size_t upper = state_index(dressed, m, transition.upper);
  const std::size_t lower = state_index(dressed, m - 2, transition.lower);
  out.rate.transition = transition;
  out.rate.eta_res = resonance_frequency(dressed, m, upper, lower).eta;
  out.rate.population_difference = population_difference(dressed, config.nbar, m, upper, lower);
  out.rate.theta = Complex(kNaN, kNaN);
  out.tone_kind = "none";
  // Near level crossings the tone can be ambiguous or the rate singular;
  // such points are kept and flagged.
  try {
    const ModulationSpec spec = resolve_modulation(retarget(config, transition), params, dressed);
    out.rate = transition_rate(spec, dressed, config.nbar, transition);
    const auto tones = drive_tones(spec);
    const auto classes = classify_tones(tones, dressed, m - 2, m);
    if (out.rate.tone != TransitionRate::kNoToneIndex) out.tone_kind = std::string(to_string(classes.kinds[out.rate.tone]));
    out.constraints_ok = validate_constraints(params, spec, dressed, m - 2, m).all_pass();
  } catch (const InvalidArgument& e) {
    out.rate.note = e.what();
    out.constraints_ok = false;
  } catch (const NumericalFailure& e) {
    out.rate.note = e.what();
    out.constraints_ok = false;
  }
  return out;
}

std::vector<double> grid(double start, double stop, int count) {
  std::vector<double> v;
  for (int i = 0; i < count; ++i) v.push_back(start + (stop - start) * static_cast<double>(i) / (count - 1));
  return v;
}

// Curve families of Fig. 1 (population differences vs |delta1|) and Fig. 2
// (rates vs signed delta1). Every (T, S) pair is emitted; `positive` marks
// the ones the paper plots.
void run_curves(const ExperimentConfig& config, bool signed_axis, unsigned threads, ResultBundle& bundle) {
  const std::vector<double> xs = signed_axis ? grid(-10.0, 10.0, 201) : grid(0.0, 10.0, 101);
  struct Job {
    double x;
    const CurveFamily* family;
    TransitionRef transition;
  };
  std::vector<Job> jobs;
  for (double x : xs) {
    for (const auto& fam : kFamilies) {
      for (Label up : family_labels(fam.regime)) {
        for (Label low : family_labels(fam.regime)) jobs.push_back({x, &fam, {config.m, up, low}});
      }
    }
  }
  std::vector<CurvePoint> points(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    const Job& job = jobs[i];
    ParamsConfig pc = config.params;
    pc.delta1 = (signed_axis ? job.x : -job.x) * pc.g00;
    pc.rule = job.family->rule;
    if (job.family->qubit) pc.g01 = 0.0;
    points[i] = evaluate_curve_point(config, resolve_params(pc), job.family->regime, job.transition);
  });

  std::vector<TableColumn> cols{{signed_axis ? "delta1_g" : "abs_delta1_g", "G00"},
                                {"curve", "-"},
                                {"regime", "-"}};
  for (auto& c : rate_columns()) cols.push_back(c);
  cols.push_back({"tone_kind", "-"});
  cols.push_back({"positive", "bool"});
  cols.push_back({"regime_ok", "bool"});
  cols.push_back({"constraints_ok", "bool"});
  Table table(std::move(cols));
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& job = jobs[i];
    const auto& p = points[i];
    const std::string curve = "(" + label_short(job.transition.upper) + "," + label_short(job.transition.lower) + ")_" +
                              job.family->suffix;
    std::vector<Cell> row{job.x, curve, std::string(to_string(job.family->regime))};
    for (auto& c : rate_cells(p.rate)) row.push_back(std::move(c));
    row.emplace_back(p.tone_kind);
    row.emplace_back(p.rate.population_difference > 0.0);
    row.emplace_back(p.regime_ok);
    row.emplace_back(p.constraints_ok);
    table.add_row(std::move(row));
  }
  bundle.tables.emplace_back("curves", std::move(table));
}

// Predicted combined transfer rate of the fast tones acting on their own
// resonance transitions: sqrt(sum |Theta_j|^2).
double predicted_rate(const ExperimentConfig& config, const ModulationSpec& spec, const DressedBasis& dressed,
                      ResultBundle& bundle) {
  std::set<std::tuple<int, int, int>> seen;
  double sum = 0.0;
  for (const auto& tc : config.modulation) {
    for (const auto& tone : tc.tones) {
      if (!tone.resonance) continue;
      const auto& t = *tone.resonance;
      if (!seen.insert({t.m, static_cast<int>(t.upper), static_cast<int>(t.lower)}).second) continue;
      const TransitionRate r = transition_rate(spec, dressed, config.nbar, t);
      bundle.facts.emplace_back("theta_abs " + to_string(t), format_double(std::abs(r.theta)));
      bundle.facts.emplace_back("eta_res " + to_string(t), format_double(r.eta_res));
      if (!r.rate_ok) bundle.warnings.push_back("rate for " + to_string(t) + ": " + r.note);
      sum += std::norm(r.theta);
    }
  }
  return std::sqrt(sum);
}

Table summary_table(const std::vector<std::pair<std::string, TransferSummary>>& rows, double g00, double rate,
                    bool constraints_ok) {
  Table t({{"source", "-"},
           {"n_tot_initial", "1"},
           {"n_tot_min", "1"},
           {"annihilated", "1"},
           {"t_first_min", "1/omega0"},
           {"t_first_min_g", "1/G00"},
           {"period", "1/omega0"},
           {"period_g", "1/G00"},
           {"predicted_rate", "omega0"},
           {"predicted_period", "1/omega0"},
           {"constraints_ok", "bool"}});
  const double predicted_period = rate > 0.0 ? kPi / rate : kNaN;
  for (const auto& [name, s] : rows) {
    t.add_row({name, s.initial, s.minimum, s.annihilated, s.t_first_min, s.t_first_min * g00, s.period,
               s.period * g00, rate, predicted_period, constraints_ok});
  }
  return t;
}

Table with_flag(const TimeSeries& series, double g00, bool constraints_ok) {
  Table base = to_table(series, g00);
  std::vector<TableColumn> cols = base.columns();
  cols.push_back({"constraints_ok", "bool"});
  Table out(std::move(cols));
  for (const auto& row : base.rows()) {
    std::vector<Cell> r = row;
    r.emplace_back(constraints_ok);
    out.add_row(std::move(r));
  }
  return out;
}

// Thermal ensemble through the effective equations: member |0,k> starts in
// the dressed states of subspace k with amplitudes <phi_{k,T}|0,k>.
TimeSeries effective_ensemble(const ThermalEnsemble& ensemble, const RateTable& rates, const DressedBasis& dressed,
                              const EffectiveControls& controls, const std::vector<std::string>& names,
                              unsigned threads) {
  const auto& members = ensemble.members;
  std::vector<TimeSeries> results(members.size());
  parallel_for(members.size(), threads, [&](std::size_t i) {
    const int k = members[i].photons;
    int m_min = k - kLadderReach;
    while (m_min < 0) m_min += 2;
    const int m_max = std::min(k + kLadderReach, rates.m_hi);
    std::vector<std::pair<StateKey, Complex>> init;
    const auto& sub = dressed.subspace(k);
    for (std::size_t t = 0; t < sub.size(); ++t) init.push_back({{k, t}, Complex(sub[t].coefficient(0), 0.0)});
    const EffectiveSystem sys = build_effective_system(rates, dressed, m_min, m_max, init);
    results[i] = integrate_effective(sys, controls);
  });

  TimeSeries total;
  total.times = results.front().times;
  for (const auto& n : names) total.add_column(n, "1");
  total.add_column("n_tot", "1");
  total.add_column("norm", "1");
  for (std::size_t i = 0; i < members.size(); ++i) {
    const double w = members[i].weight;
    for (auto& col : total.columns) {
      const Column* src = results[i].find(col.name);
      if (src == nullptr) continue;
      for (std::size_t s = 0; s < col.values.size(); ++s) col.values[s] += w * src->values[s];
    }
  }
  total.metadata = results.front().metadata;
  return total;
}

void run_dynamics(const ExperimentConfig& config, unsigned threads, ResultBundle& bundle) {
  const SystemParams params = resolve_params(config.params);
  check_regime(params, config.regime, config.m + 2);
  const auto& num = config.numerics;
  const ThermalEnsemble ensemble = thermal_ensemble(config.nbar, num.tail_tol);
  const int top_member = ensemble.members.back().photons;
  const int n_max = num.n_max > 0 ? num.n_max : static_cast<int>(ensemble.members.size()) + 4;
  const int ladder_top = std::max(top_member + kLadderReach, config.m + kLadderReach);
  const DressedBasis dressed = scenario_dressed(params, config.regime, std::max(ladder_top, config.m + 4) + 2);
  const ModulationSpec spec = resolve_modulation(config, params, dressed);
  const ConstraintReport report = validate_constraints(params, spec, dressed, 0, config.m + kLadderReach);
  bundle.reports.emplace_back("constraints", report);

  const double rate = predicted_rate(config, spec, dressed, bundle);
  double t_end = num.t_end;
  if (t_end == 0.0) {
    if (!(rate > 0.0)) throw ConfigError("numerics.t_end is required when no resonant tone sets a transfer rate");
    t_end = 1.5 * kPi / rate;
    bundle.facts.emplace_back("t_end_rule", "1.5 predicted transfer periods");
  }
  const double dt_out = num.dt_out > 0.0 ? num.dt_out : t_end / num.samples;
  bundle.facts.emplace_back("t_end", format_double(t_end));
  bundle.facts.emplace_back("dt_out", format_double(dt_out));
  bundle.facts.emplace_back("n_max", std::to_string(n_max));
  bundle.facts.emplace_back("ensemble_members", std::to_string(ensemble.members.size()));
  bundle.facts.emplace_back("truncation_deficit", format_double(ensemble.deficit));

  std::vector<std::pair<int, Label>> states = config.states;
  const double g00 = params.G0[0];
  std::vector<std::pair<std::string, TransferSummary>> summaries;

  const RateTable tones_only = [&] {
    RateTable t;
    t.tones = drive_tones(spec);
    t.classes = classify_tones(t.tones, dressed, 0, config.m + kLadderReach);
    return t;
  }();
  bundle.tables.emplace_back("tones", tone_table(tones_only.tones, tones_only.classes));
  for (const auto& w : tones_only.classes.warnings) bundle.warnings.push_back(w);

  if (num.exact) {
    const Basis basis(n_max);
    const Propagator propagator(params, spec, basis, num.frame);
    PropagationControls controls;
    controls.t_end = t_end;
    controls.dt_out = dt_out;
    controls.step_factor = num.step_factor;
    controls.fixed_step = num.fixed_step;
    controls.norm_tol = num.norm_tol;
    controls.max_refinements = num.max_refinements;
    controls.leakage_tol = num.leakage_tol;
    controls.frame = num.frame;
    const auto projectors = dressed_projectors(dressed, basis, states);
    const TimeSeries series = run_ensemble(ensemble, propagator, controls, projectors, threads);
    for (const auto& [k, v] : series.metadata) bundle.facts.emplace_back("exact." + k, v);
    bundle.facts.emplace_back("exact.lambda_max", format_double(propagator.lambda_max()));
    bundle.tables.emplace_back("exact", with_flag(series, g00, report.all_pass()));
    summaries.emplace_back("exact", summarize_transfer(series.times, series.find("n_tot")->values));
  }
  if (num.effective) {
    const RateTable rates = build_rate_table(spec, dressed, 0, ladder_top, tones_only.classes);
    EffectiveControls controls;
    controls.t_end = t_end;
    controls.dt_out = dt_out;
    std::vector<std::string> names;
    for (const auto& [m, label] : states) names.push_back("P(" + std::to_string(m) + "," + dressed.state(m, label).tag() + ")");
    const TimeSeries series = effective_ensemble(ensemble, rates, dressed, controls, names, threads);
    for (const auto& [k, v] : series.metadata) bundle.facts.emplace_back("effective." + k, v);
    bundle.tables.emplace_back("effective", with_flag(series, g00, report.all_pass()));
    summaries.emplace_back("effective", summarize_transfer(series.times, series.find("n_tot")->values));
  }
  bundle.tables.emplace_back("summary", summary_table(summaries, g00, rate, report.all_pass()));
}

void run_dressed(const ExperimentConfig& config, ResultBundle& bundle) {
  const SystemParams params = resolve_params(config.params);
  const int m_max = config.numerics.m_max;
  check_regime(params, config.regime, m_max);
  const DressedBasis dressed = scenario_dressed(params, config.regime, m_max + 2);
  DressedBasis analytic;
  bool have_analytic = false;
  if (config.regime != Regime::Numeric) {
    analytic = dressed_analytic(params, config.regime, m_max);
    have_analytic = true;
  }
  Table t({{"m", "-"},
           {"label", "-"},
           {"ordinal", "-"},
           {"lambda", "omega0"},
           {"nu", "omega0"},
           {"lambda_tilde", "omega0"},
           {"nu_boundary", "bool"},
           {"c0", "1"},
           {"c1", "1"},
           {"c2", "1"},
           {"analytic_lambda", "omega0"},
           {"analytic_overlap", "1"}});
  for (int m = 0; m <= m_max; ++m) {
    for (const auto& s : dressed.subspace(m)) {
      double a_lambda = kNaN;
      double overlap = kNaN;
      if (have_analytic && s.label) {
        for (const auto& a : analytic.subspace(m)) {
          if (a.label == s.label) {
            a_lambda = a.lambda;
            overlap = std::abs(a.vector.dot(s.vector));
          }
        }
      }
      t.add_row({static_cast<long long>(m), s.tag(), static_cast<long long>(s.ordinal), s.lambda, s.nu,
                 s.lambda_tilde, s.nu_boundary, s.coefficient(0), s.coefficient(1), s.coefficient(2), a_lambda,
                 overlap});
    }
  }
  bundle.tables.emplace_back("dressed", std::move(t));
  const ModulationSpec spec = resolve_modulation(config, params, dressed);
  bundle.reports.emplace_back("constraints", validate_constraints(params, spec, dressed, 0, m_max));
}

void run_rates(const ExperimentConfig& config, ResultBundle& bundle) {
  const SystemParams params = resolve_params(config.params);
  int m_hi = config.m;
  for (const auto& t : config.transitions) m_hi = std::max(m_hi, t.m);
  check_regime(params, config.regime, m_hi + 2);
  const int m_lo = std::max(0, config.m - 4);
  const DressedBasis dressed = scenario_dressed(params, config.regime, m_hi + 4);
  const ModulationSpec spec = resolve_modulation(config, params, dressed);
  const RateTable rates = build_rate_table(spec, dressed, m_lo, m_hi);
  bundle.reports.emplace_back("constraints", validate_constraints(params, spec, dressed, m_lo, m_hi));
  bundle.tables.emplace_back("tones", tone_table(rates.tones, rates.classes));
  for (const auto& w : rates.classes.warnings) bundle.warnings.push_back(w);

  auto tag = [&](int m, std::size_t i) { return dressed.subspace(m)[i].tag(); };
  Table theta({{"tone", "-"}, {"m_upper", "-"}, {"upper", "-"}, {"lower", "-"}, {"eta_res", "omega0"},
               {"detuning", "omega0"}, {"theta_re", "omega0"}, {"theta_im", "omega0"}, {"theta_abs", "omega0"},
               {"half_transfer_time", "1/omega0"}});
  for (const auto& [key, value] : rates.theta) {
    const double eta = rates.resonances.at({key.m, key.s, key.t}).eta;
    theta.add_row({static_cast<long long>(key.tone), static_cast<long long>(key.m), tag(key.m, key.s),
                   tag(key.m - 2, key.t), eta, rates.tones[key.tone].frequency - eta, value.real(), value.imag(),
                   std::abs(value), std::abs(value) > 0.0 ? kPi / (2.0 * std::abs(value)) : kNaN});
  }
  bundle.tables.emplace_back("theta", std::move(theta));
  Table sigma({{"m", "-"}, {"upper", "-"}, {"lower", "-"}, {"sigma_re", "omega0"}, {"sigma_im", "omega0"}});
  for (const auto& [key, value] : rates.sigma) {
    sigma.add_row({static_cast<long long>(key.m), tag(key.m, key.t), tag(key.m, key.s), value.real(), value.imag()});
  }
  bundle.tables.emplace_back("sigma", std::move(sigma));
  Table xi({{"tone", "-"}, {"m", "-"}, {"upper", "-"}, {"lower", "-"}, {"xi_re", "omega0"}, {"xi_im", "omega0"}});
  for (const auto& [key, value] : rates.xi) {
    xi.add_row({static_cast<long long>(key.tone), static_cast<long long>(key.m), tag(key.m, key.t), tag(key.m, key.s),
                value.real(), value.imag()});
  }
  bundle.tables.emplace_back("xi", std::move(xi));
  Table transitions(rate_columns());
  for (const auto& t : config.transitions) transitions.add_row(rate_cells(transition_rate(spec, dressed, config.nbar, t)));
  bundle.tables.emplace_back("transitions", std::move(transitions));
}

ExperimentConfig apply_axis(ExperimentConfig c, const std::string& axis, double value) {
  if (axis == "delta1_g") {
    c.params.delta1 = value * c.params.g00;
  } else if (axis == "eta_offset") {
    for (auto& tc : c.modulation) {
      for (auto& tone : tc.tones) tone.offset += value;
    }
  } else if (axis == "depth_scale") {
    for (auto& tc : c.modulation) tc.depth *= value;
  } else if (axis == "nbar") {
    c.nbar = value;
  }
  return c;
}

void run_sweep(const ExperimentConfig& config, unsigned threads, ResultBundle& bundle) {
  const auto& axes = config.sweep.axes;
  std::vector<std::vector<double>> points;
  if (axes.size() == 1) {
    for (double a : axes[0].values) points.push_back({a});
  } else {
    for (double a : axes[0].values) {
      for (double b : axes[1].values) points.push_back({a, b});
    }
  }
  const bool exact = config.sweep.compute == SweepCompute::Exact;
  struct PointResult {
    std::vector<TransitionRate> rates;
    bool regime_ok = true;
    bool constraints_ok = true;
    TransferSummary transfer;
  };
  std::vector<PointResult> results(points.size());
  int m_hi = 0;
  for (const auto& t : config.transitions) m_hi = std::max(m_hi, t.m);

  parallel_for(points.size(), threads, [&](std::size_t i) {
    ExperimentConfig c = config;
    for (std::size_t a = 0; a < axes.size(); ++a) c = apply_axis(c, axes[a].name, points[i][a]);
    const SystemParams params = resolve_params(c.params);
    PointResult& r = results[i];
    r.regime_ok = regime_failure(params, c.regime, m_hi).empty();
    const DressedBasis dressed = scenario_dressed(params, c.regime, m_hi + 4);
    const ModulationSpec spec = resolve_modulation(c, params, dressed);
    for (const auto& t : c.transitions) r.rates.push_back(transition_rate(spec, dressed, c.nbar, t));
    r.constraints_ok = validate_constraints(params, spec, dressed, std::max(0, m_hi - 2), m_hi).all_pass();
    if (exact) {
      ExperimentConfig sim = c;
      sim.numerics.effective = false;
      ResultBundle inner;
      run_dynamics(sim, 1, inner);
      const Table& s = inner.table("summary");
      r.transfer.annihilated = s.number(0, "annihilated");
      r.transfer.t_first_min = s.number(0, "t_first_min");
      r.transfer.period = s.number(0, "period");
    }
  });

  std::vector<TableColumn> cols;
  for (const auto& a : axes) cols.push_back({a.name, a.name == "delta1_g" ? "G00" : (a.name == "eta_offset" ? "omega0" : "1")});
  for (auto& c : rate_columns()) cols.push_back(c);
  cols.push_back({"regime_ok", "bool"});
  cols.push_back({"constraints_ok", "bool"});
  if (exact) {
    cols.push_back({"annihilated", "1"});
    cols.push_back({"t_first_min", "1/omega0"});
  }
  Table table(std::move(cols));
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (const auto& rate : results[i].rates) {
      std::vector<Cell> row;
      for (double v : points[i]) row.emplace_back(v);
      for (auto& c : rate_cells(rate)) row.push_back(std::move(c));
      row.emplace_back(results[i].regime_ok);
      row.emplace_back(results[i].constraints_ok);
      if (exact) {
        row.emplace_back(results[i].transfer.annihilated);
        row.emplace_back(results[i].transfer.t_first_min);
      }
      table.add_row(std::move(row));
    }
  }
  bundle.tables.emplace_back("sweep", std::move(table));
}

}  // namespace

DressedBasis scenario_dressed(const SystemParams& params, Regime regime, int m_max) {
  return nu_corrections(dressed_numeric(params, m_max, regime));
}

std::string regime_failure(const SystemParams& params, Regime regime, int m) {
  if (regime == Regime::Numeric) return {};
  try {
    dressed_analytic(params, regime, std::max(m, 2));
  } catch (const RegimeViolation& e) {
    return e.what();
  }
  return {};
}

void check_regime(const SystemParams& params, Regime regime, int m) {
  if (regime == Regime::Numeric) return;
  dressed_analytic(params, regime, std::max(m, 2));
}

ModulationSpec resolve_modulation(const ExperimentConfig& config, const SystemParams& params,
                                  const DressedBasis& dressed) {
  ModulationSpec spec;
  for (Target t : kAllTargets) {
    const TargetConfig& tc = config.target(t);
    if (tc.depth == 0.0) continue;
    ParameterModulation& pm = spec[t];
    pm.depth = tc.relative ? tc.depth * bare_reference(t, params) : tc.depth;
    for (const auto& tone : tc.tones) {
      double eta = tone.frequency;
      if (tone.resonance) {
        const auto& r = *tone.resonance;
        const Resonance res = resonance_frequency(dressed, r.m, state_index(dressed, r.m, r.upper),
                                                  state_index(dressed, r.m - 2, r.lower));
        eta = res.eta;
      }
      pm.tones.push_back({eta + tone.offset, tone.weight, tone.phase});
    }
  }
  spec.validate();
  return spec;
}

double TransitionRate::half_transfer_time() const {
  const double a = std::abs(theta);
  return a > 0.0 ? kPi / (2.0 * a) : kNaN;
}

TransitionRate transition_rate(const ModulationSpec& spec, const DressedBasis& dressed, double nbar,
                               const TransitionRef& transition) {
  TransitionRate out;
  out.transition = transition;
  const int m = transition.m;
  const std::size_t upper = state_index(dressed, m, transition.upper);
  const std::size_t lower = state_index(dressed, m - 2, transition.lower);
  out.eta_res = resonance_frequency(dressed, m, upper, lower).eta;
  out.population_difference = population_difference(dressed, nbar, m, upper, lower);

  const auto tones = drive_tones(spec);
  ToneClass classes;
  try {
    classes = classify_tones(tones, dressed, m - 2, m);
  } catch (const InvalidArgument& e) {
    out.note = e.what();
    out.theta = Complex(kNaN, kNaN);
    return out;
  }
  double best = HUGE_VAL;
  for (std::size_t j = 0; j < tones.size(); ++j) {
    if (classes.kinds[j] != ToneKind::Fast) continue;
    const double d = std::abs(tones[j].frequency - out.eta_res);
    if (d < best) {
      best = d;
      out.tone = j;
    }
  }
  if (out.tone == TransitionRate::kNoToneIndex) {
    out.note = "no fast tone";
    return out;
  }
  out.detuning = tones[out.tone].frequency - out.eta_res;
  try {
    out.theta = theta_rate(tones[out.tone], ToneKind::Fast, dressed, m, lower, upper);
    out.rate_ok = true;
  } catch (const NumericalFailure& e) {
    out.theta = Complex(kNaN, kNaN);
    out.note = e.what();
  }
  return out;
}

TransferSummary summarize_transfer(const std::vector<double>& times, const std::vector<double>& values) {
  TransferSummary s;
  if (values.empty()) return s;
  // Moving average over ~5% of the run removes the counter-rotating ripple.
  const std::size_t n = values.size();
  const std::size_t half = std::max<std::size_t>(1, n / 40);
  std::vector<double> smooth(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    double acc = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) acc += values[k];
    smooth[i] = acc / static_cast<double>(hi - lo + 1);
  }
  s.initial = values.front();
  const double floor = *std::min_element(smooth.begin(), smooth.end());
  s.minimum = floor;
  s.annihilated = s.initial - floor;
  // First excursion below half of the full drop, ending once the trace
  // recovers three quarters of it; its minimum is the first transfer.
  const double level = s.initial - 0.5 * s.annihilated;
  const double recovered = s.initial - 0.25 * s.annihilated;
  std::size_t start = 0;
  while (start < n && smooth[start] > level) ++start;
  if (start == n) start = n - 1;
  std::size_t best = start;
  for (std::size_t i = start; i < n && smooth[i] <= recovered; ++i) {
    if (smooth[i] < smooth[best]) best = i;
  }
  s.t_first_min = times[best];
  s.period = 2.0 * s.t_first_min;
  return s;
}

const Table& ResultBundle::table(const std::string& name) const {
  for (const auto& [n, t] : tables) {
    if (n == name) return t;
  }
  throw InvalidArgument("result has no table named " + name);
}

bool ResultBundle::has_table(const std::string& name) const {
  return std::any_of(tables.begin(), tables.end(), [&](const auto& p) { return p.first == name; });
}

std::string ResultBundle::fact(const std::string& key) const {
  for (const auto& [k, v] : facts) {
    if (k == key) return v;
  }
  throw InvalidArgument("result has no fact named " + key);
}

double ResultBundle::number(const std::string& key) const { return std::stod(fact(key)); }

ResultBundle run_scenario(const ExperimentConfig& config, const RunOptions& options) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();
  ResultBundle bundle;
  bundle.config = config;
  bundle.config_json = to_json(config);
  bundle.config_hash = git_blob_hash(bundle.config_json);
  const unsigned threads = resolve_threads(options.threads);

  switch (config.scenario) {
    case Scenario::Fig1: run_curves(config, false, threads, bundle); break;
    case Scenario::Fig2a:
    case Scenario::Fig2b: run_curves(config, true, threads, bundle); break;
    case Scenario::Fig3a:
    case Scenario::Fig3b:
    case Scenario::Fig3c:
    case Scenario::Fig4:
    case Scenario::Simulate: run_dynamics(config, threads, bundle); break;
    case Scenario::Sweep: run_sweep(config, threads, bundle); break;
    case Scenario::Rates: run_rates(config, bundle); break;
    case Scenario::Dressed: run_dressed(config, bundle); break;
  }
  for (const auto& [name, report] : bundle.reports) bundle.tables.emplace_back(name, report_table(report));
  bundle.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return bundle;
}

std::string metadata_json(const ResultBundle& bundle, const std::vector<std::string>& files) {
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["tool"] = "adce";
  doc["version"] = kVersion;
  doc["scenario"] = std::string(to_string(bundle.config.scenario));
  doc["config_hash"] = bundle.config_hash;
  doc["config"] = Json::parse(bundle.config_json);
  doc["runtime_seconds"] = bundle.runtime_seconds;
  doc["rng"] = "none";
  doc["files"] = files;
  Json reports = Json::object();
  for (const auto& [name, report] : bundle.reports) reports[name] = report_json(report);
  doc["constraints"] = reports;
  Json facts = Json::object();
  for (const auto& [k, v] : bundle.facts) facts[k] = v;
  doc["facts"] = facts;
  doc["warnings"] = bundle.warnings;
  return doc.dump(2) + "\n";
}

std::vector<std::string> write_bundle(const ResultBundle& bundle, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
  const std::string prefix = bundle.config.prefix();
  std::vector<std::string> written;
  auto write_file = [&](const std::string& name, const std::string& content) {
    const fs::path path = fs::path(dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
    written.push_back(path.string());
  };
  std::vector<std::string> names;
  for (const auto& [name, table] : bundle.tables) {
    names.push_back(prefix + "_" + name + ".csv");
    write_file(names.back(), to_csv(table));
  }
  names.push_back(prefix + ".gp");
  write_file(names.back(), gnuplot_script(bundle, prefix));
  write_file(prefix + "_metadata.json", metadata_json(bundle, names));
  return written;
}

}  // namespace adce
