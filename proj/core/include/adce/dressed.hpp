#pragma once

// Dressed eigenstructure of the bare Hamiltonian H0, one excitation subspace
// at a time. Five routes: numerical diagonalization, and the closed forms of
// the two-level (2L), double-resonant (RR), dispersive (DR) and mixed (MR)
// regimes.
//
// Vectors are stored over the canonical subspace basis |0,m>, |1,m-1>, |2,m-2>
// (members with negative photon number omitted), so for m >= 2 the position in
// the vector is the atomic level.

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adce/hilbert.hpp"

namespace adce {

enum class Regime { Numeric, TwoLevel, DoubleResonant, Dispersive, Mixed };

std::string_view to_string(Regime regime);
/// Accepts "numeric", "2L", "RR", "DR", "MR" (case-insensitive).
Regime parse_regime(std::string_view name);

/// Semantic dressed-state labels. PlusD / MinusD are the +D / -D branches of
/// the detuning symbol; One / Two name the dominant atomic level in DR.
enum class Label { Zero, PlusD, MinusD, One, Two };

std::string_view to_string(Label label);
Label parse_label(std::string_view name);

struct DressedState {
  int m = 0;
  std::optional<Label> label;  // semantic tag, absent for unlabelled numeric states
  int ordinal = 0;             // rank by ascending eigenvalue inside the subspace
  double lambda = 0.0;
  Eigen::VectorXd vector;
  double nu = 0.0;
  double lambda_tilde = 0.0;
  bool nu_boundary = false;  // neighbour subspace missing, nu left at zero

  /// Coefficient on |atom, m - atom>; zero when that state is not in the subspace.
  double coefficient(int atom) const;
  /// Label text, or "#<ordinal>" when unlabelled.
  std::string tag() const;
};

class DressedBasis {
 public:
  DressedBasis() = default;
  DressedBasis(SystemParams params, Regime regime, std::vector<std::vector<DressedState>> subspaces)
      : params_(params), regime_(regime), subspaces_(std::move(subspaces)) {}

  const SystemParams& params() const { return params_; }
  Regime regime() const { return regime_; }
  /// Largest excitation number held.
  int max_m() const { return static_cast<int>(subspaces_.size()) - 1; }
  bool has(int m) const { return m >= 0 && m <= max_m(); }

  /// Throws InvalidArgument when subspace m is not held.
  const std::vector<DressedState>& subspace(int m) const;
  std::vector<DressedState>& subspace(int m);
  const DressedState& state(int m, Label label) const;
  const DressedState& by_ordinal(int m, int ordinal) const;
  /// Index of the labelled state inside subspace(m).
  std::size_t index_of(int m, Label label) const;

  /// Dressed vector embedded into the full canonical Basis.
  Eigen::VectorXcd embed(const DressedState& state, const Basis& basis) const;

 private:
  SystemParams params_;
  Regime regime_ = Regime::Numeric;
  std::vector<std::vector<DressedState>> subspaces_;
};

/// Diagonalizes every complete N-block of H0. States are phase-fixed (largest
/// coefficient positive) and ranked by eigenvalue. When `label_regime` names an
/// analytic regime, semantic labels are attached by maximal overlap with that
/// regime's closed-form states. Throws InvalidArgument if H0 couples different
/// excitation subspaces.
DressedBasis dressed_numeric(const OperatorMatrix& h0, const Basis& basis, const SystemParams& params,
                             Regime label_regime = Regime::Numeric);

/// Convenience: builds the basis and H0 internally.
DressedBasis dressed_numeric(const SystemParams& params, int m_max, Regime label_regime = Regime::Numeric);

/// Two-level closed forms (requires G_{0,1} == 0, m >= 1).
std::vector<DressedState> dressed_2l(const SystemParams& params, int m);
/// Double-resonant closed forms (requires delta2 == -delta1, m >= 2, both couplings > 0).
std::vector<DressedState> dressed_rr(const SystemParams& params, int m);
/// Dispersive regime: printed 4th-order eigenvalues with first-order eigenvectors.
std::vector<DressedState> dressed_dr(const SystemParams& params, int m);
/// Mixed regime (delta2 == 0): second-order expressions.
std::vector<DressedState> dressed_mr(const SystemParams& params, int m);

/// All subspaces 0..m_max from one analytic regime; the single-excitation
/// subspace uses the 2L forms (DR uses its own). Regime preconditions are
/// enforced per subspace.
DressedBasis dressed_analytic(const SystemParams& params, Regime regime, int m_max);

/// Validity figure of merit for DR/MR: the smallest detuning-to-coupling ratio.
/// Must be >= kPerturbativeRatio for the formulas to be used.
double dispersive_ratio(const SystemParams& params);
double mixed_ratio(const SystemParams& params);
inline constexpr double kPerturbativeRatio = 4.0;

/// Counter-rotating frequency corrections nu and lambda_tilde = lambda + nu.
/// States whose m - 2 or m + 2 neighbour is missing keep nu = 0 and get
/// nu_boundary = true.
DressedBasis nu_corrections(DressedBasis dressed);

struct ConstraintCheck {
  std::string name;
  double worst = 0.0;      // largest observed value, units of omega0
  double threshold = 0.0;  // pass iff worst <= threshold
  std::string where;       // location of the worst value
  bool pass = true;
};

struct ConstraintReport {
  std::vector<ConstraintCheck> checks;
  bool all_pass() const;
};

inline constexpr double kMuchLessThan = 0.2;  // "<<" relative to omega0
inline constexpr double kAtMost = 1.0;        // "<~" and the intra-subspace gap bound

/// Evaluates the weak-perturbation inequalities over subspaces [m_lo, m_hi].
/// Requires neighbours m_hi + 2 in `dressed`.
ConstraintReport validate_constraints(const SystemParams& params, const ModulationSpec& spec,
                                      const DressedBasis& dressed, int m_lo, int m_hi);

}  // namespace adce
