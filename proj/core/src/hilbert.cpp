#include "adce/hilbert.hpp"

#include <cmath>
#include <string>

#include "adce/error.hpp"

namespace adce {

SystemParams SystemParams::from_detunings(double g00, double g01, double delta1, double delta2,
                                          double omega0) {
  SystemParams p;
  p.omega0 = omega0;
  p.G0 = {g00, g01};
  const double e1 = omega0 - delta1;
  p.E0 = {0.0, e1, e1 + omega0 - delta2};
  return p;
}

void SystemParams::validate() const {
  if (!(omega0 > 0.0)) throw InvalidArgument("omega0 must be positive");
  if (E0[0] != 0.0) throw InvalidArgument("E_{0,0} must be exactly 0");
  if (G0[0] < 0.0 || G0[1] < 0.0) throw InvalidArgument("couplings must be non-negative");
  for (double e : E0) {
    if (!std::isfinite(e)) throw InvalidArgument("atomic energies must be finite");
  }
}

std::string_view to_string(Target target) {
  switch (target) {
    case Target::E1: return "E1";
    case Target::E2: return "E2";
    case Target::G0: return "G0";
    case Target::G1: return "G1";
  }
  return "?";
}

Target parse_target(std::string_view name) {
  for (Target t : kAllTargets) {
    if (to_string(t) == name) return t;
  }
  throw InvalidArgument("unknown modulation target '" + std::string(name) + "'");
}

bool ModulationSpec::empty() const {
  for (const auto& m : targets) {
    if (m.active()) return false;
  }
  return true;
}

void ModulationSpec::validate() const {
  for (Target t : kAllTargets) {
    const auto& m = (*this)[t];
    const std::string name(to_string(t));
    if (m.depth == 0.0) {
      if (!m.tones.empty()) throw InvalidArgument("unmodulated target " + name + " carries tones");
      continue;
    }
    if (m.tones.empty()) throw InvalidArgument("modulated target " + name + " has no tones");
    double total = 0.0;
    for (const auto& tone : m.tones) {
      if (!(tone.frequency > 0.0)) throw InvalidArgument("tone frequency must be positive on " + name);
      if (tone.weight < 0.0 || tone.weight > 1.0) throw InvalidArgument("tone weight outside [0,1] on " + name);
      total += tone.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("tone weights on " + name + " do not sum to 1");
  }
}

ModulationSpec ModulationSpec::scaled(double factor) const {
  ModulationSpec out = *this;
  for (auto& m : out.targets) m.depth *= factor;
  return out;
}

double modulation_value(const ModulationSpec& spec, Target target, double bare, double t) {
  const auto& m = spec[target];
  if (m.depth == 0.0) return bare;
  double f = 0.0;
  for (const auto& tone : m.tones) f += tone.weight * std::sin(tone.frequency * t + tone.phase);
  return bare + m.depth * f;
}

double modulation_value(const ModulationSpec& spec, std::string_view target, double bare, double t) {
  return modulation_value(spec, parse_target(target), bare, t);
}

double modulation_integral(const ModulationSpec& spec, Target target, double t) {
  const auto& m = spec[target];
  if (m.depth == 0.0) return 0.0;
  double acc = 0.0;
  for (const auto& tone : m.tones) {
    acc += tone.weight * (std::cos(tone.phase) - std::cos(tone.frequency * t + tone.phase)) / tone.frequency;
  }
  return m.depth * acc;
}

Basis::Basis(int n_max) : n_max_(n_max) {
  if (n_max < 2) throw InvalidArgument("invalid cutoff: n_max must be >= 2, got " + std::to_string(n_max));
  const int max_n = n_max + 2;
  subspaces_.resize(static_cast<std::size_t>(max_n) + 1);
  lookup_.assign(static_cast<std::size_t>(n_max + 1) * kAtomLevels, 0);
  for (int excitation = 0; excitation <= max_n; ++excitation) {
    for (int atom = 0; atom < kAtomLevels; ++atom) {
      const int photons = excitation - atom;
      if (photons < 0 || photons > n_max) continue;
      const std::size_t idx = states_.size();
      states_.push_back({atom, photons});
      subspaces_[static_cast<std::size_t>(excitation)].push_back(idx);
      lookup_[static_cast<std::size_t>(photons) * kAtomLevels + static_cast<std::size_t>(atom)] = idx;
    }
  }
}

const std::vector<std::size_t>& Basis::subspace(int excitation) const {
  static const std::vector<std::size_t> kEmpty;
  if (excitation < 0 || excitation > max_excitation()) return kEmpty;
  return subspaces_[static_cast<std::size_t>(excitation)];
}

bool Basis::complete(int excitation) const { return excitation >= 0 && excitation <= n_max_; }

bool Basis::contains(int atom, int photons) const {
  return atom >= 0 && atom < kAtomLevels && photons >= 0 && photons <= n_max_;
}

std::size_t Basis::index_of(int atom, int photons) const {
  if (!contains(atom, photons)) {
    throw InvalidArgument("state |" + std::to_string(atom) + "," + std::to_string(photons) + "> outside basis");
  }
  return lookup_[static_cast<std::size_t>(photons) * kAtomLevels + static_cast<std::size_t>(atom)];
}

Basis build_basis(int n_max) { return Basis(n_max); }

double OperatorMatrix::hermiticity_residual() const {
  return (entries - entries.adjoint()).cwiseAbs().maxCoeff();
}

InstantParams instantaneous(const SystemParams& params, const ModulationSpec& spec, double t) {
  InstantParams out;
  out.E = {params.E0[0], modulation_value(spec, Target::E1, params.E0[1], t),
           modulation_value(spec, Target::E2, params.E0[2], t)};
  out.G = {modulation_value(spec, Target::G0, params.G0[0], t),
           modulation_value(spec, Target::G1, params.G0[1], t)};
  return out;
}

namespace {

OperatorMatrix assemble(const SystemParams& params, const InstantParams& p, const Basis& basis,
                        bool counter_rotating) {
  const auto dim = static_cast<Eigen::Index>(basis.size());
  OperatorMatrix h{Eigen::MatrixXcd::Zero(dim, dim)};
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto& s = basis[i];
    const auto ii = static_cast<Eigen::Index>(i);
    h.entries(ii, ii) = params.omega0 * s.photons + p.E[static_cast<std::size_t>(s.atom)];
    if (s.atom >= 2) continue;
    const double g = p.G[static_cast<std::size_t>(s.atom)];
    // rotating: |k, n> <-> |k+1, n-1>
    if (s.photons >= 1) {
      const auto j = static_cast<Eigen::Index>(basis.index_of(s.atom + 1, s.photons - 1));
      const double v = g * std::sqrt(static_cast<double>(s.photons));
      h.entries(ii, j) = v;
      h.entries(j, ii) = v;
    }
    // counter-rotating: |k, n> <-> |k+1, n+1>
    if (counter_rotating && basis.contains(s.atom + 1, s.photons + 1)) {
      const auto j = static_cast<Eigen::Index>(basis.index_of(s.atom + 1, s.photons + 1));
      const double v = g * std::sqrt(static_cast<double>(s.photons + 1));
      h.entries(ii, j) = v;
      h.entries(j, ii) = v;
    }
  }
  return h;
}

}  // namespace

OperatorMatrix hamiltonian_bare(const SystemParams& params, const Basis& basis) {
  params.validate();
  InstantParams p;
  p.E = params.E0;
  p.G = params.G0;
  return assemble(params, p, basis, false);
}

OperatorMatrix hamiltonian_full(const SystemParams& params, const ModulationSpec& spec, double t,
                                const Basis& basis) {
  params.validate();
  spec.validate();
  return assemble(params, instantaneous(params, spec, t), basis, true);
}

}  // namespace adce
