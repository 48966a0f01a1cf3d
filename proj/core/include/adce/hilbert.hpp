#pragma once

// Truncated qutrit (x) Fock space, modulation law and Hamiltonian assembly.
//
// Units: omega0 = 1 throughout; energies and frequencies are in units of the
// cavity frequency, times in units of 1/omega0.

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstddef>
#include <string_view>
#include <vector>

namespace adce {

using Complex = std::complex<double>;

inline constexpr int kAtomLevels = 3;

/// Static (unmodulated) physical parameters.
struct SystemParams {
  double omega0 = 1.0;
  std::array<double, 3> E0{0.0, 1.0, 2.0};  // bare atomic energies, E0[0] == 0
  std::array<double, 2> G0{0.0, 0.0};       // bare couplings G_{0,0}, G_{0,1}

  double omega01() const { return E0[1] - E0[0]; }
  double omega12() const { return E0[2] - E0[1]; }
  double delta1() const { return omega0 - omega01(); }
  double delta2() const { return omega0 - omega12(); }
  /// Detuning symbol: +1 for delta1 >= 0, -1 otherwise.
  int detuning_symbol() const { return delta1() >= 0.0 ? +1 : -1; }
  /// Coupling G_{0,k}; G_{0,2} is identically zero.
  double coupling(int k) const { return (k == 0 || k == 1) ? G0[static_cast<std::size_t>(k)] : 0.0; }

  /// Parameters from the cavity detunings delta1 = omega0 - Omega01 and
  /// delta2 = omega0 - Omega12.
  static SystemParams from_detunings(double g00, double g01, double delta1, double delta2,
                                     double omega0 = 1.0);

  /// Throws InvalidArgument when an invariant is broken.
  void validate() const;
};

/// Modulated parameters. E1/E2 are atomic energies, G0/G1 couplings.
enum class Target { E1 = 0, E2 = 1, G0 = 2, G1 = 3 };
inline constexpr std::array<Target, 4> kAllTargets{Target::E1, Target::E2, Target::G0, Target::G1};

std::string_view to_string(Target target);
/// Parses "E1", "E2", "G0", "G1"; anything else throws InvalidArgument.
Target parse_target(std::string_view name);

struct Tone {
  double frequency = 0.0;  // eta, units of omega0
  double weight = 1.0;     // w in [0, 1]
  double phase = 0.0;      // phi, radians
};

struct ParameterModulation {
  double depth = 0.0;  // epsilon_l, same units as the target
  std::vector<Tone> tones;

  bool active() const { return depth != 0.0 && !tones.empty(); }
};

/// Multi-tone drive, one entry per modulated parameter.
struct ModulationSpec {
  std::array<ParameterModulation, 4> targets{};

  ParameterModulation& operator[](Target t) { return targets[static_cast<std::size_t>(t)]; }
  const ParameterModulation& operator[](Target t) const { return targets[static_cast<std::size_t>(t)]; }

  bool empty() const;
  /// Weights sum to one per modulated target, frequencies positive, and an
  /// unmodulated target carries no tones.
  void validate() const;
  /// Same spec with every depth multiplied by `factor`.
  ModulationSpec scaled(double factor) const;
};

/// Instantaneous value bare + eps * sum_j w_j sin(eta_j t + phi_j).
double modulation_value(const ModulationSpec& spec, Target target, double bare, double t);
/// String-keyed variant; unknown target names throw InvalidArgument.
double modulation_value(const ModulationSpec& spec, std::string_view target, double bare, double t);

/// Integral of the modulation term from 0 to t: eps * sum_j w_j (cos phi_j - cos(eta_j t + phi_j)) / eta_j.
double modulation_integral(const ModulationSpec& spec, Target target, double t);

struct BasisState {
  int atom = 0;     // k in {0, 1, 2}
  int photons = 0;  // n >= 0
  int excitation() const { return atom + photons; }
  friend bool operator==(const BasisState&, const BasisState&) = default;
};

/// Canonical truncated basis: ascending excitation number N, and ascending
/// atomic level inside each N-subspace.
class Basis {
 public:
  explicit Basis(int n_max);

  int n_max() const { return n_max_; }
  std::size_t size() const { return states_.size(); }
  const std::vector<BasisState>& states() const { return states_; }
  const BasisState& operator[](std::size_t i) const { return states_[i]; }

  /// Highest excitation number present (n_max + 2).
  int max_excitation() const { return n_max_ + 2; }
  /// Member indices of subspace N in canonical order; empty if N is out of range.
  const std::vector<std::size_t>& subspace(int excitation) const;
  /// Subspace size g(N) under this cutoff.
  std::size_t degeneracy(int excitation) const { return subspace(excitation).size(); }
  /// True when subspace N is not truncated by the cutoff.
  bool complete(int excitation) const;

  /// Index of |k, n>; throws InvalidArgument when the state is not in the basis.
  std::size_t index_of(int atom, int photons) const;
  bool contains(int atom, int photons) const;

 private:
  int n_max_;
  std::vector<BasisState> states_;
  std::vector<std::vector<std::size_t>> subspaces_;
  std::vector<std::size_t> lookup_;  // (photons * 3 + atom) -> index
};

/// Throws InvalidArgument("invalid cutoff") for n_max < 2.
Basis build_basis(int n_max);

/// Dense Hermitian operator over a Basis.
struct OperatorMatrix {
  Eigen::MatrixXcd entries;

  std::size_t dim() const { return static_cast<std::size_t>(entries.rows()); }
  /// max |H - H^dagger| entry.
  double hermiticity_residual() const;
};

/// Bare Hamiltonian H0: photon energy, atomic energies and rotating couplings only.
OperatorMatrix hamiltonian_bare(const SystemParams& params, const Basis& basis);

/// Full Hamiltonian at time t with rotating and counter-rotating couplings and
/// the instantaneous modulated E_k(t), G_k(t).
OperatorMatrix hamiltonian_full(const SystemParams& params, const ModulationSpec& spec, double t,
                                const Basis& basis);

/// Instantaneous atomic energies and couplings.
struct InstantParams {
  std::array<double, 3> E{};
  std::array<double, 2> G{};
};
InstantParams instantaneous(const SystemParams& params, const ModulationSpec& spec, double t);

}  // namespace adce
