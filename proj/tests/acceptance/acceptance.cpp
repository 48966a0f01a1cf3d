// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "adce/config.hpp"
#include "adce/dressed.hpp"
#include "adce/error.hpp"
#include "adce/exact.hpp"
#include "adce/experiments.hpp"
#include "adce/hilbert.hpp"

using namespace adce;

namespace {

constexpr double G = 0.06;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

unsigned threads() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string str(double x) { return format_double(x); }

// Strings unquoted, everything else as written to CSV.
std::string cell_text(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  return format_cell(c);
}

// Rows of `t` whose column `col` renders as `value`.
std::vector<std::size_t> rows_where(const Table& t, const std::string& col, const std::string& value) {
  std::vector<std::size_t> out;
  const std::size_t c = t.column_index(col);
  for (std::size_t i = 0; i < t.rows().size(); ++i) {
    if (cell_text(t.rows()[i][c]) == value) out.push_back(i);
  }
  return out;
}

double curve_value(const Table& t, const std::string& x_col, double x, const std::string& curve,
                   const std::string& y_col) {
  for (std::size_t i : rows_where(t, "curve", curve)) {
    if (t.number(i, x_col) == x) return t.number(i, y_col);
  }
  throw InvalidArgument("curve point missing: " + curve);
}

// --- criterion 1 ----------------------------------------------------------

void exact_regimes(Outcome& out) {
  std::mt19937 rng(1);
  auto uniform = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  double worst_rel = 0.0;
  double worst_overlap = 1.0;
  auto compare = [&](const DressedBasis& numeric, const std::vector<DressedState>& analytic, int m) {
    for (const auto& a : analytic) {
      const auto& n = numeric.state(m, *a.label);
      worst_rel = std::max(worst_rel, std::abs(a.lambda - n.lambda) / std::abs(n.lambda));
      worst_overlap = std::min(worst_overlap, std::abs(a.vector.dot(n.vector)));
    }
  };
  for (int draw = 0; draw < 200; ++draw) {
    const double g = uniform(0.005, 0.1);
    const auto p = SystemParams::from_detunings(g, 0.0, uniform(-10, 10) * g, uniform(-0.5, 0.5));
    const auto numeric = dressed_numeric(p, 8, Regime::TwoLevel);
    for (int m = 2; m <= 8; ++m) compare(numeric, dressed_2l(p, m), m);
  }
  for (int draw = 0; draw < 200; ++draw) {
    const double g = uniform(0.005, 0.1);
    const double d1 = uniform(-10, 10) * g;
    const auto p = SystemParams::from_detunings(g, uniform(0.2, 2.0) * g, d1, -d1);
    const auto numeric = dressed_numeric(p, 8, Regime::DoubleResonant);
    for (int m = 2; m <= 8; ++m) compare(numeric, dressed_rr(p, m), m);
  }
  out.detail << "max relative eigenvalue error " << worst_rel << ", min overlap 1-" << 1.0 - worst_overlap;
  out.require(worst_rel <= 1e-10, "eigenvalue error");
  out.require(worst_overlap >= 1.0 - 1e-10, "overlap");
}

// --- criterion 2 ----------------------------------------------------------

double regime_error(const SystemParams& p, Regime regime) {
  const auto numeric = dressed_numeric(p, 8, regime);
  const auto analytic = dressed_analytic(p, regime, 8);
  double err = 0.0;
  for (int m = 2; m <= 8; ++m) {
    for (const auto& a : analytic.subspace(m)) {
      err = std::max(err, std::abs(a.lambda - numeric.state(m, *a.label).lambda));
    }
  }
  return err;
}

void perturbative_scaling(Outcome& out) {
  double worst_dr = 1e300;
  double worst_mr = 1e300;
  double fixed_dr = 1e300;
  for (double sign : {-1.0, 1.0}) {
    const auto dr8 = SystemParams::from_detunings(G, 1.2 * G, sign * 8 * G, sign * 6 * G);
    // Every detuning doubles, so each expansion parameter G/delta halves.
    const auto dr16 = SystemParams::from_detunings(G, 1.2 * G, sign * 16 * G, sign * 12 * G);
    worst_dr = std::min(worst_dr, regime_error(dr8, Regime::Dispersive) / regime_error(dr16, Regime::Dispersive));
    // The plotted DR rule keeps delta2 = 6G; reported for reference only.
    const auto dr16_fixed = SystemParams::from_detunings(G, 1.2 * G, sign * 16 * G, sign * 6 * G);
    fixed_dr = std::min(fixed_dr, regime_error(dr8, Regime::Dispersive) / regime_error(dr16_fixed, Regime::Dispersive));
    const auto mr8 = SystemParams::from_detunings(G, 1.2 * G, sign * 8 * G, 0.0);
    const auto mr16 = SystemParams::from_detunings(G, 1.2 * G, sign * 16 * G, 0.0);
    worst_mr = std::min(worst_mr, regime_error(mr8, Regime::Mixed) / regime_error(mr16, Regime::Mixed));
  }
  out.detail << "error shrink factor DR " << worst_dr << ", MR " << worst_mr << " (DR with delta2 held at 6G: "
             << fixed_dr << ")";
  out.require(worst_dr >= 2.0, "DR");
  out.require(worst_mr >= 2.0, "MR");
}

// --- criterion 3 ----------------------------------------------------------

void nu_validity(Outcome& out) {
  int states = 0;
  int improved = 0;
  std::ostringstream worse;
  for (Scenario s : {Scenario::Fig3a, Scenario::Fig3c}) {
    const auto p = resolve_params(default_config(s).params);
    const auto d = nu_corrections(dressed_numeric(p, 8));
    const Basis basis(16);
    const auto h = hamiltonian_full(p, ModulationSpec{}, 0.0, basis);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.entries);
    for (int m = 0; m <= 6; ++m) {
      for (const auto& st : d.subspace(m)) {
        Eigen::Index best = 0;
        (es.eigenvectors().adjoint() * d.embed(st, basis)).cwiseAbs().maxCoeff(&best);
        const double e = es.eigenvalues()(best);
        ++states;
        const double bare = std::abs(st.lambda - e);
        const double corrected = std::abs(st.lambda_tilde - e);
        // Decoupled states are exact already; a tie at rounding level counts.
        if (corrected < bare || (bare < 1e-12 && corrected < 1e-12)) {
          ++improved;
        } else {
          worse << " " << to_string(s) << ":(" << m << "," << st.tag() << ") " << corrected << " vs " << bare;
        }
      }
    }
  }
  out.detail << improved << "/" << states << " states not worse with nu" << worse.str();
  out.require(improved == states, "nu correction");
}

// --- criteria 4, 5 --------------------------------------------------------

void fig1(Outcome& out) {
  const auto b = run_scenario(default_config(Scenario::Fig1), {threads()});
  const Table& t = b.table("curves");
  const double ratio = curve_value(t, "abs_delta1_g", 8.0, "(D,-D)_r", "P") /
                       curve_value(t, "abs_delta1_g", 8.0, "(D,-D)_2L", "P");
  out.detail << "P_RR/P_2L " << ratio;
  out.require(ratio >= 0.35 && ratio <= 0.65, "ratio");
  for (const char* c : {"(D,-D)_r", "(0,-D)_r", "(0,1)_d", "(0,2)_d", "(0,D)_m", "(0,-D)_m", "(D,-D)_2L"}) {
    const double p = curve_value(t, "abs_delta1_g", 8.0, c, "P");
    out.require(p > 0.0, std::string("P>0 for ") + c);
  }
  double max_rr = -1.0;
  for (std::size_t i : rows_where(t, "regime", "RR")) {
    if (t.number(i, "abs_delta1_g") == 0.0) max_rr = std::max(max_rr, t.number(i, "P"));
  }
  out.detail << ", largest RR difference at zero detuning " << max_rr;
  out.require(max_rr < 0.0, "RR negative at zero detuning");
}

void fig2(Outcome& out) {
  const auto a = run_scenario(default_config(Scenario::Fig2a), {threads()});
  const auto b = run_scenario(default_config(Scenario::Fig2b), {threads()});
  for (double x : {-8.0, 8.0}) {
    const double rr = curve_value(a.table("curves"), "delta1_g", x, "(D,-D)_r", "theta_abs");
    const double q = curve_value(a.table("curves"), "delta1_g", x, "(D,-D)_2L", "theta_abs");
    const double joint = curve_value(b.table("curves"), "delta1_g", x, "(D,-D)_r", "theta_abs");
    out.detail << "delta1=" << x << "G: RR/2L " << rr / q << ", joint/E1 " << joint / rr << "; ";
    out.require(rr / q >= 10.0, "enhancement at " + str(x));
    out.require(joint > rr, "joint modulation at " + str(x));
  }
}

// --- criteria 6 to 9 ------------------------------------------------------

struct FigureRuns {
  ResultBundle a, b, c;
};

double summary(const ResultBundle& b, const std::string& source, const std::string& col) {
  const Table& t = b.table("summary");
  for (std::size_t i : rows_where(t, "source", source)) return t.number(i, col);
  throw InvalidArgument("summary row missing: " + source);
}

FigureRuns run_figures() {
  FigureRuns r;
  auto a = default_config(Scenario::Fig3a);
  a.numerics.effective = false;
  r.a = run_scenario(a, {threads()});
  r.b = run_scenario(default_config(Scenario::Fig3b), {threads()});
  r.c = run_scenario(default_config(Scenario::Fig3c), {threads()});
  return r;
}

void fig3a(const FigureRuns& r, Outcome& out) {
  const double period = summary(r.a, "exact", "period_g");
  const double annihilated = summary(r.a, "exact", "annihilated");
  out.detail << "period " << period << "/G00, annihilated " << annihilated;
  out.require(period >= 3400.0 && period <= 4600.0, "period");
  out.require(std::abs(annihilated - 0.1) <= 0.02, "annihilated");
}

void fig3_speedups(const FigureRuns& r, Outcome& out) {
  const double ta = summary(r.a, "exact", "t_first_min");
  const double tb = summary(r.b, "exact", "t_first_min");
  const double tc = summary(r.c, "exact", "t_first_min");
  const double nb = summary(r.b, "exact", "annihilated");
  const double nc = summary(r.c, "exact", "annihilated");
  out.detail << "3a/3b " << ta / tb << ", 3b/3c " << tb / tc << ", 3a/3c " << ta / tc << ", annihilated 3b " << nb
             << " 3c " << nc;
  out.require(ta / tb >= 20.0 && ta / tb <= 40.0, "3a/3b");
  out.require(tb / tc >= 1.3 && tb / tc <= 1.7, "3b/3c");
  out.require(ta / tc >= 30.0 && ta / tc <= 50.0, "3a/3c");
  out.require(std::abs(nb - 0.1) <= 0.03, "annihilated 3b");
  out.require(std::abs(nc - 0.1) <= 0.03, "annihilated 3c");
}

void effective_oracle(const FigureRuns& r, Outcome& out) {
  const Table& ex = r.c.table("exact");
  const Table& ef = r.c.table("effective");
  double worst = 0.0;
  for (const auto& col : ex.columns()) {
    if (col.name.rfind("P(", 0) != 0) continue;
    for (std::size_t i = 0; i < ex.rows().size(); ++i) {
      worst = std::max(worst, std::abs(ex.number(i, col.name) - ef.number(i, col.name)));
    }
  }
  double spectator = 0.0;
  const double p0 = ex.number(0, "P(3,-D)");
  for (std::size_t i = 0; i < ex.rows().size(); ++i) spectator = std::max(spectator, std::abs(ex.number(i, "P(3,-D)") - p0));
  out.detail << "max |effective - exact| " << worst << ", P(3,-D) excursion " << spectator;
  out.require(ex.rows().size() == ef.rows().size(), "sample grids");
  out.require(worst <= 0.05, "populations");
  out.require(spectator <= 0.02, "spectator");
}

// Final-state error of fixed-step RK4 runs at the fig3c parameters, against
// a run with a sixteen times smaller step.
double step_error(double h) {
  const auto p = resolve_params(default_config(Scenario::Fig3c).params);
  ModulationSpec spec;
  spec[Target::E1].depth = 0.05 * p.omega01();
  spec[Target::E1].tones = {{1.44, 1.0, 0.0}};
  const Basis basis(14);
  const Propagator prop(p, spec, basis);
  PropagationControls c;
  c.t_end = 200.0;
  c.dt_out = 200.0;
  c.norm_tol = 1.0;
  auto final_state = [&](double step) {
    c.fixed_step = step;
    return prop.run(fock_state(basis, 0, 4), c).states.back();
  };
  return (final_state(h) - final_state(0.1 / 16)).norm();
}

void hygiene(const FigureRuns& r, Outcome& out) {
  double drift = 0.0;
  for (const auto* b : {&r.a, &r.b, &r.c}) drift = std::max(drift, b->number("exact.max_norm_drift"));
  const double ratio = step_error(0.1) / step_error(0.05);
  bool constraints = true;
  // Modulations of the rate figures, checked through the rates scenario.
  for (Scenario s : {Scenario::Fig2a, Scenario::Fig2b, Scenario::Fig3b}) {
    auto c = default_config(Scenario::Rates);
    c.modulation = default_config(s).modulation;
    for (const auto& [name, rep] : run_scenario(c).reports) constraints = constraints && rep.all_pass();
  }
  for (const auto* b : {&r.a, &r.b, &r.c}) {
    for (const auto& [name, rep] : b->reports) constraints = constraints && rep.all_pass();
  }
  out.detail << "max norm drift " << drift << ", step-halving error ratio " << ratio << ", constraints "
             << (constraints ? "pass" : "fail");
  out.require(drift <= 1e-8, "norm");
  out.require(ratio >= 12.0 && ratio <= 20.0, "fourth order");
  out.require(constraints, "constraint reports");
}

bool report(int id, const std::string& name, const std::function<void(Outcome&)>& check) {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    check(out);
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail << " [error: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("criterion %d %s: %s: %s (%.1fs)\n", id, out.pass ? "PASS" : "FAIL", name.c_str(),
              out.detail.str().c_str(), secs);
  std::fflush(stdout);
  return out.pass;
}

}  // namespace

int main() {
  bool ok = true;
  ok &= report(1, "exact regime equivalence", exact_regimes);
  ok &= report(2, "perturbative regime scaling", perturbative_scaling);
  ok &= report(3, "nu correction validity", nu_validity);
  ok &= report(4, "population difference structure", fig1);
  ok &= report(5, "rate enhancement", fig2);

  FigureRuns runs;
  std::string run_error;
  try {
    runs = run_figures();
  } catch (const std::exception& e) {
    run_error = e.what();
  }
  auto with_runs = [&](void (*f)(const FigureRuns&, Outcome&)) {
    return [&, f](Outcome& out) {
      if (!run_error.empty()) throw InvalidArgument("figure runs failed: " + run_error);
      f(runs, out);
    };
  };
  ok &= report(6, "qubit transfer period and depth", with_runs(fig3a));
  ok &= report(7, "qutrit speedups", with_runs(fig3_speedups));
  ok &= report(8, "effective versus exact populations", with_runs(effective_oracle));
  ok &= report(9, "numerical hygiene", with_runs(hygiene));
  std::printf("acceptance: %s\n", ok ? "PASS" : "FAIL");
  return ok ? 0 : 1;
}
