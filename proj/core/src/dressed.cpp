#include "adce/dressed.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numeric>
#include <string>

#include "adce/error.hpp"
#include "adce/matrix_elements.hpp"

namespace adce {

namespace {

constexpr double kExactTol = 1e-12;  // "exactly equal" for detuning relations
constexpr double kTieTol = 1e-9;     // relative magnitude tie in the phase convention

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

// Largest-magnitude coefficient made positive; near-ties go to the lowest index.
void fix_phase(Eigen::VectorXd& v) {
  const double top = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) >= top * (1.0 - kTieTol)) {
      if (v[i] < 0.0) v = -v;
      return;
    }
  }
}

std::size_t subspace_size(int m) { return static_cast<std::size_t>(std::min(m + 1, 3)); }

DressedState make_state(int m, Label label, double lambda, std::array<double, 3> coeffs) {
  DressedState s;
  s.m = m;
  s.label = label;
  s.lambda = lambda;
  s.lambda_tilde = lambda;
  const auto g = static_cast<Eigen::Index>(subspace_size(m));
  s.vector.resize(g);
  for (Eigen::Index i = 0; i < g; ++i) s.vector[i] = coeffs[static_cast<std::size_t>(i)];
  const double norm = s.vector.norm();
  s.vector /= norm;
  fix_phase(s.vector);
  return s;
}

void assign_ordinals(std::vector<DressedState>& states) {
  std::vector<std::size_t> order(states.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return states[a].lambda < states[b].lambda; });
  for (std::size_t r = 0; r < order.size(); ++r) states[order[r]].ordinal = static_cast<int>(r);
}

DressedState ground_state() { return make_state(0, Label::Zero, 0.0, {1.0, 0.0, 0.0}); }

void require_m(int m, int lowest, const char* what) {
  if (m < lowest) {
    throw InvalidArgument(std::string(what) + " needs m >= " + std::to_string(lowest) + ", got " +
                          std::to_string(m));
  }
}

// --- closed forms without precondition checks -------------------------------

std::vector<DressedState> two_level_forms(const SystemParams& p, int m) {
  const double d1 = p.delta1();
  const int D = p.detuning_symbol();
  const double g = p.G0[0];
  const double beta = std::sqrt(d1 * d1 + 4.0 * g * g * m);
  const double beta_p = 0.5 * (beta + std::abs(d1));
  const double beta_m = 0.5 * (beta - std::abs(d1));
  const double base = p.omega0 * m - 0.5 * d1;
  std::vector<DressedState> out;
  // +D branch, then -D branch.
  out.push_back(make_state(m, Label::PlusD, base + D * 0.5 * beta,
                           {std::sqrt(beta_p / beta), D * std::sqrt(beta_m / beta), 0.0}));
  out.push_back(make_state(m, Label::MinusD, base - D * 0.5 * beta,
                           {std::sqrt(beta_m / beta), -D * std::sqrt(beta_p / beta), 0.0}));
  assign_ordinals(out);
  return out;
}

DressedState spectator_level_two(const SystemParams& p, int m) {
  return make_state(m, Label::Two, p.omega0 * (m - 2) + p.E0[2], {0.0, 0.0, 1.0});
}

std::vector<DressedState> double_resonant_forms(const SystemParams& p, int m) {
  const double d1 = p.delta1();
  const int D = p.detuning_symbol();
  const double a = p.G0[0] * std::sqrt(static_cast<double>(m));
  const double b = p.G0[1] * std::sqrt(static_cast<double>(m - 1));
  const double rho = std::sqrt(0.25 * d1 * d1 + a * a + b * b);
  const double rho_p = rho + 0.5 * std::abs(d1);
  const double rho_m = rho - 0.5 * std::abs(d1);
  const double w = p.omega0 * m;
  std::vector<DressedState> out;
  out.push_back(make_state(m, Label::Zero, w, {-b, 0.0, a}));
  out.push_back(make_state(m, Label::PlusD, w + D * rho_m, {a, D * rho_m, b}));
  out.push_back(make_state(m, Label::MinusD, w - D * rho_p, {a, -D * rho_p, b}));
  assign_ordinals(out);
  return out;
}

std::vector<DressedState> dispersive_forms(const SystemParams& p, int m) {
  const double d1 = p.delta1();
  const double d2 = p.delta2();
  const double g0 = p.G0[0];
  const double g1 = p.G0[1];
  const double mm = m;
  const double m1 = m - 1;
  const double a = g0 * std::sqrt(mm);
  const double b = g1 * std::sqrt(m1);
  const double delta_1 = g0 * g0 / d1;  // dispersive shifts
  const double delta_2 = g1 * g1 / d2;
  const double w = p.omega0 * m;
  const double sum = d1 + d2;

  const double l0 = w + delta_1 * mm * (1.0 + g1 * g1 * m1 / (d1 * sum) - g0 * g0 * mm / (d1 * d1));
  const double l1 = w - d1 - (delta_1 * mm - delta_2 * m1) *
                                 (1.0 - g0 * g0 * mm / (d1 * d1) - g1 * g1 * m1 / (d2 * d2));
  const double l2 =
      w - d1 - d2 - delta_2 * m1 * (1.0 + g0 * g0 * mm / (d2 * sum) - g1 * g1 * m1 / (d2 * d2));

  std::vector<DressedState> out;
  out.push_back(make_state(m, Label::Zero, l0, {1.0, a / d1, a * b / (d1 * sum)}));
  out.push_back(make_state(m, Label::One, l1, {-a / d1, 1.0, b / d2}));
  if (m >= 2) out.push_back(make_state(m, Label::Two, l2, {a * b / (d2 * sum), -b / d2, 1.0}));
  assign_ordinals(out);
  return out;
}

std::vector<DressedState> mixed_forms(const SystemParams& p, int m) {
  const double d1 = p.delta1();
  const double ad1 = std::abs(d1);
  const int D = p.detuning_symbol();
  const double a = p.G0[0] * std::sqrt(static_cast<double>(m));
  const double b = p.G0[1] * std::sqrt(static_cast<double>(m - 1));
  const double w = p.omega0 * m;

  const double rho0 = a / (d1 * d1 - b * b);
  std::vector<DressedState> out;
  out.push_back(make_state(m, Label::Zero, w + d1 * a * a / (d1 * d1 - b * b), {1.0, rho0 * d1, rho0 * b}));
  for (int sgn : {+1, -1}) {
    // sgn = +1 -> +D branch (upper signs), sgn = -1 -> -D branch.
    const double denom = b - sgn * ad1;
    const double rho = a / denom;
    const double r = 0.25 * a * a / (b * denom);
    const double gap = ad1 - sgn * b;
    const double lambda = w - D * (gap + 0.5 * a * a / gap);
    out.push_back(make_state(m, sgn > 0 ? Label::PlusD : Label::MinusD, lambda,
                             {rho, sgn * D * (1.0 + r), 1.0 - r}));
  }
  assign_ordinals(out);
  return out;
}

// Closed-form candidates covering the whole subspace, used for labelling.
std::vector<DressedState> analytic_candidates(const SystemParams& p, Regime regime, int m) {
  if (m == 0) return {ground_state()};
  switch (regime) {
    case Regime::Dispersive:
      return dispersive_forms(p, m);
    case Regime::TwoLevel: {
      auto out = two_level_forms(p, m);
      if (m >= 2) out.push_back(spectator_level_two(p, m));
      assign_ordinals(out);
      return out;
    }
    case Regime::DoubleResonant:
      return m == 1 ? two_level_forms(p, m) : double_resonant_forms(p, m);
    case Regime::Mixed:
      return m == 1 ? two_level_forms(p, m) : mixed_forms(p, m);
    case Regime::Numeric:
      break;
  }
  return {};
}

// Attach labels by the permutation maximizing total squared overlap.
void label_by_overlap(std::vector<DressedState>& numeric, const std::vector<DressedState>& candidates) {
  if (candidates.size() != numeric.size()) return;
  std::vector<std::size_t> perm(candidates.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> best = perm;
  double best_score = -1.0;
  do {
    double score = 0.0;
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      const double o = numeric[i].vector.dot(candidates[perm[i]].vector);
      score += o * o;
    }
    if (score > best_score + 1e-14) {
      best_score = score;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (std::size_t i = 0; i < numeric.size(); ++i) numeric[i].label = candidates[best[i]].label;
}

bool nearly(double x, double target, double scale) { return std::abs(x - target) <= kExactTol * scale; }

}  // namespace

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::Numeric: return "numeric";
    case Regime::TwoLevel: return "2L";
    case Regime::DoubleResonant: return "RR";
    case Regime::Dispersive: return "DR";
    case Regime::Mixed: return "MR";
  }
  return "?";
}

Regime parse_regime(std::string_view name) {
  const std::string n = lower(name);
  if (n == "numeric") return Regime::Numeric;
  if (n == "2l") return Regime::TwoLevel;
  if (n == "rr") return Regime::DoubleResonant;
  if (n == "dr") return Regime::Dispersive;
  if (n == "mr") return Regime::Mixed;
  throw InvalidArgument("unknown regime '" + std::string(name) + "' (expected numeric, 2L, RR, DR, MR)");
}

std::string_view to_string(Label label) {
  switch (label) {
    case Label::Zero: return "0";
    case Label::PlusD: return "+D";
    case Label::MinusD: return "-D";
    case Label::One: return "1";
    case Label::Two: return "2";
  }
  return "?";
}

Label parse_label(std::string_view name) {
  if (name == "0") return Label::Zero;
  if (name == "+D" || name == "D") return Label::PlusD;
  if (name == "-D") return Label::MinusD;
  if (name == "1") return Label::One;
  if (name == "2") return Label::Two;
  throw InvalidArgument("unknown dressed label '" + std::string(name) + "'");
}

double DressedState::coefficient(int atom) const {
  if (atom < 0 || atom >= vector.size()) return 0.0;
  return vector[atom];
}

std::string DressedState::tag() const {
  if (label) return std::string(to_string(*label));
  return "#" + std::to_string(ordinal);
}

const std::vector<DressedState>& DressedBasis::subspace(int m) const {
  if (!has(m)) throw InvalidArgument("dressed subspace m=" + std::to_string(m) + " not available");
  return subspaces_[static_cast<std::size_t>(m)];
}

std::vector<DressedState>& DressedBasis::subspace(int m) {
  if (!has(m)) throw InvalidArgument("dressed subspace m=" + std::to_string(m) + " not available");
  return subspaces_[static_cast<std::size_t>(m)];
}

std::size_t DressedBasis::index_of(int m, Label label) const {
  const auto& states = subspace(m);
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].label == label) return i;
  }
  throw InvalidArgument("no state labelled " + std::string(to_string(label)) + " in subspace m=" +
                        std::to_string(m));
}

const DressedState& DressedBasis::state(int m, Label label) const { return subspace(m)[index_of(m, label)]; }

const DressedState& DressedBasis::by_ordinal(int m, int ordinal) const {
  for (const auto& s : subspace(m)) {
    if (s.ordinal == ordinal) return s;
  }
  throw InvalidArgument("ordinal out of range in subspace m=" + std::to_string(m));
}

Eigen::VectorXcd DressedBasis::embed(const DressedState& state, const Basis& basis) const {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
  for (int k = 0; k < state.vector.size(); ++k) {
    out[static_cast<Eigen::Index>(basis.index_of(k, state.m - k))] = state.vector[k];
  }
  return out;
}

DressedBasis dressed_numeric(const OperatorMatrix& h0, const Basis& basis, const SystemParams& params,
                             Regime label_regime) {
  if (h0.dim() != basis.size()) throw InvalidArgument("Hamiltonian dimension does not match basis");
  const double scale = std::max(1.0, h0.entries.cwiseAbs().maxCoeff());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = 0; j < basis.size(); ++j) {
      if (basis[i].excitation() == basis[j].excitation()) continue;
      if (std::abs(h0.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) > 1e-14 * scale) {
        throw InvalidArgument("Hamiltonian is not block-diagonal in the excitation number");
      }
    }
  }

  std::vector<std::vector<DressedState>> subspaces;
  for (int m = 0; m <= basis.n_max(); ++m) {
    const auto& members = basis.subspace(m);
    const auto g = static_cast<Eigen::Index>(members.size());
    Eigen::MatrixXd block(g, g);
    for (Eigen::Index a = 0; a < g; ++a) {
      for (Eigen::Index b = 0; b < g; ++b) {
        block(a, b) = h0.entries(static_cast<Eigen::Index>(members[static_cast<std::size_t>(a)]),
                                 static_cast<Eigen::Index>(members[static_cast<std::size_t>(b)]))
                          .real();
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(block);
    if (solver.info() != Eigen::Success) throw NumericalFailure("eigensolver failed on subspace " + std::to_string(m));
    std::vector<DressedState> states;
    for (Eigen::Index c = 0; c < g; ++c) {
      DressedState s;
      s.m = m;
      s.ordinal = static_cast<int>(c);  // eigenvalues come out ascending
      s.lambda = solver.eigenvalues()[c];
      s.lambda_tilde = s.lambda;
      s.vector = solver.eigenvectors().col(c);
      fix_phase(s.vector);
      states.push_back(std::move(s));
    }
    if (m == 0) {
      states[0].label = Label::Zero;
    } else if (label_regime != Regime::Numeric) {
      label_by_overlap(states, analytic_candidates(params, label_regime, m));
    }
    subspaces.push_back(std::move(states));
  }
  return DressedBasis(params, label_regime, std::move(subspaces));
}

DressedBasis dressed_numeric(const SystemParams& params, int m_max, Regime label_regime) {
  const Basis basis = build_basis(std::max(m_max, 2));
  auto full = dressed_numeric(hamiltonian_bare(params, basis), basis, params, label_regime);
  if (m_max >= 2) return full;
  std::vector<std::vector<DressedState>> subs;
  for (int m = 0; m <= m_max; ++m) subs.push_back(full.subspace(m));
  return DressedBasis(params, label_regime, std::move(subs));
}

std::vector<DressedState> dressed_2l(const SystemParams& params, int m) {
  params.validate();
  if (params.G0[1] != 0.0) throw RegimeViolation("2L regime requires G_{0,1} = 0", params.G0[1]);
  require_m(m, 1, "2L forms");
  return two_level_forms(params, m);
}

std::vector<DressedState> dressed_rr(const SystemParams& params, int m) {
  params.validate();
  const double d1 = params.delta1();
  const double d2 = params.delta2();
  if (!nearly(d2, -d1, params.omega0)) {
    throw RegimeViolation("RR regime requires delta2 = -delta1 (delta1=" + std::to_string(d1) +
                              ", delta2=" + std::to_string(d2) + ")",
                          d1 + d2);
  }
  if (!(params.G0[0] > 0.0) || !(params.G0[1] > 0.0)) {
    throw RegimeViolation("RR regime requires both couplings positive", 0.0);
  }
  require_m(m, 2, "RR forms (use the 2L forms for m = 1)");
  return double_resonant_forms(params, m);
}

double dispersive_ratio(const SystemParams& params) {
  const double d1 = std::abs(params.delta1());
  const double d2 = std::abs(params.delta2());
  const double ds = std::abs(params.delta1() + params.delta2());
  const double g0 = params.G0[0];
  const double g1 = params.G0[1];
  const double inf = std::numeric_limits<double>::infinity();
  const double r1 = g0 > 0.0 ? d1 / g0 : inf;
  const double r2 = g1 > 0.0 ? d2 / g1 : inf;
  const double gmax = std::max(g0, g1);
  const double rs = gmax > 0.0 ? ds / gmax : inf;
  return std::min({r1, r2, rs});
}

double mixed_ratio(const SystemParams& params) {
  const double g0 = params.G0[0];
  return g0 > 0.0 ? std::abs(params.delta1()) / g0 : std::numeric_limits<double>::infinity();
}

std::vector<DressedState> dressed_dr(const SystemParams& params, int m) {
  params.validate();
  require_m(m, 1, "DR forms");
  const double ratio = dispersive_ratio(params);
  if (!(ratio >= kPerturbativeRatio)) {
    throw RegimeViolation("DR regime requires detuning/coupling ratio >= 4, got " + std::to_string(ratio), ratio);
  }
  return dispersive_forms(params, m);
}

std::vector<DressedState> dressed_mr(const SystemParams& params, int m) {
  params.validate();
  if (!nearly(params.delta2(), 0.0, params.omega0)) {
    throw RegimeViolation("MR regime requires delta2 = 0, got " + std::to_string(params.delta2()),
                          params.delta2());
  }
  if (!(params.G0[1] > 0.0)) throw RegimeViolation("MR regime requires G_{0,1} > 0", 0.0);
  require_m(m, 2, "MR forms (use the 2L forms for m = 1)");
  const double ratio = mixed_ratio(params);
  if (!(ratio >= kPerturbativeRatio)) {
    throw RegimeViolation("MR regime requires |delta1|/G_{0,0} >= 4, got " + std::to_string(ratio), ratio);
  }
  return mixed_forms(params, m);
}

DressedBasis dressed_analytic(const SystemParams& params, Regime regime, int m_max) {
  if (regime == Regime::Numeric) return dressed_numeric(params, m_max);
  std::vector<std::vector<DressedState>> subs;
  for (int m = 0; m <= m_max; ++m) {
    std::vector<DressedState> states;
    if (m == 0) {
      states.push_back(ground_state());
    } else {
      switch (regime) {
        case Regime::TwoLevel:
          states = dressed_2l(params, m);
          if (m >= 2) {
            states.push_back(spectator_level_two(params, m));
            assign_ordinals(states);
          }
          break;
        case Regime::DoubleResonant:
          if (m == 1) {
            states = two_level_forms(params, m);
          } else {
            states = dressed_rr(params, m);
          }
          break;
        case Regime::Dispersive:
          states = dressed_dr(params, m);
          break;
        case Regime::Mixed:
          if (m == 1) {
            states = two_level_forms(params, m);
          } else {
            states = dressed_mr(params, m);
          }
          break;
        case Regime::Numeric:
          break;
      }
    }
    subs.push_back(std::move(states));
  }
  return DressedBasis(params, regime, std::move(subs));
}

DressedBasis nu_corrections(DressedBasis dressed) {
  const SystemParams& p = dressed.params();
  const int top = dressed.max_m();
  // Corrections read the uncorrected eigenvalues only, so a snapshot is enough.
  const DressedBasis source = dressed;
  for (int m = 0; m <= top; ++m) {
    for (auto& t : dressed.subspace(m)) {
      if (m + 2 > top) {
        t.nu = 0.0;
        t.nu_boundary = true;
        t.lambda_tilde = t.lambda;
        continue;
      }
      double nu = 0.0;
      if (m >= 2) {
        for (const auto& s : source.subspace(m - 2)) {
          double amp = 0.0;
          for (int k = 0; k < 2; ++k) amp += p.G0[static_cast<std::size_t>(k)] * lowering_element(k, s, t);
          nu += amp * amp / (t.lambda - s.lambda);
        }
      }
      for (const auto& s : source.subspace(m + 2)) {
        double amp = 0.0;
        for (int k = 0; k < 2; ++k) amp += p.G0[static_cast<std::size_t>(k)] * lowering_element(k, t, s);
        nu -= amp * amp / (s.lambda - t.lambda);
      }
      t.nu = nu;
      t.nu_boundary = false;
      t.lambda_tilde = t.lambda + nu;
    }
  }
  return dressed;
}

}  // namespace adce
