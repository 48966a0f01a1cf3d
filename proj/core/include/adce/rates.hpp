#pragma once

// Perturbative coefficients of the effective dynamics: Upsilon, Lambda,
// varsigma, Xi and Theta, plus resonance frequencies and initial population
// differences for a thermal cavity.
//
// Dressed states are addressed by (m, index) where index is the position in
// DressedBasis::subspace(m).

#include <compare>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "adce/dressed.hpp"
#include "adce/hilbert.hpp"

namespace adce {

/// One modulated parameter contributing to a drive tone.
struct ToneComponent {
  Target target = Target::E1;
  double depth = 0.0;   // epsilon_l
  double weight = 1.0;  // w_l^{(j)}
  double phase = 0.0;   // phi_l^{(j)}

  /// Complex depth epsilon_l w_l exp(i phi_l).
  Complex complex_depth() const;
};

/// Drive tone j: a frequency shared by every parameter modulated at it.
struct DriveTone {
  double frequency = 0.0;
  std::vector<ToneComponent> components;
};

/// Groups the per-parameter tones of `spec` by frequency (relative match
/// 1e-12), ordered by first appearance over targets E1, E2, G0, G1.
std::vector<DriveTone> drive_tones(const ModulationSpec& spec);

enum class ToneKind { Fast, Slow, Inert };
std::string_view to_string(ToneKind kind);

struct ToneClass {
  std::vector<ToneKind> kinds;        // one per drive tone
  std::vector<std::string> warnings;  // inert tones
};

/// Window used to match a tone to a gap family.
inline constexpr double kToneWindow = 0.5;  // units of omega0

/// Fast: within omega0/2 of some |lambda_{m+2,S} - lambda_{m,T}|; slow: within
/// omega0/2 of some intra-subspace gap; inert otherwise. Matching both throws
/// InvalidArgument. Gaps are taken over m in [m_lo, m_hi] (m + 2 when present).
ToneClass classify_tones(const std::vector<DriveTone>& tones, const DressedBasis& dressed, int m_lo, int m_hi);

/// Upsilon^{L,k,j} for one tone component between states of one subspace.
double upsilon_coeff(const ToneComponent& component, const DressedState& t, const DressedState& s);
/// Field/level form: L in {'E','G'}, k in {0,1,2}; scaled by depth * weight.
double upsilon_coeff(char field, int k, double depth_weight, const DressedState& t, const DressedState& s);

/// Lambda_{k,m+2,T,S} = <phi_{m,T}| a sigma_{k,k+1} |phi_{m+2,S}>.
double lambda_coeff(const DressedBasis& dressed, int k, int m_plus_2, std::size_t t, std::size_t s);

/// varsigma_{m,T,S} as printed (purely imaginary). Needs subspace m + 2.
Complex sigma_rate(const DressedBasis& dressed, int m, std::size_t t, std::size_t s);

/// Xi^{(j)}_{m,T,S}; `kind` must be Slow. Uses lambda_tilde for the sign varpi.
Complex xi_rate(const DriveTone& tone, ToneKind kind, const DressedBasis& dressed, int m, std::size_t t,
                std::size_t s);

/// Theta^{(j)}_{m+2,T,S} with T in subspace m and S in subspace m + 2;
/// `kind` must be Fast. Throws NumericalFailure on a near-degenerate
/// denominator (|.| < kDegenerateDenominator).
Complex theta_rate(const DriveTone& tone, ToneKind kind, const DressedBasis& dressed, int m_plus_2,
                   std::size_t t, std::size_t s);
inline constexpr double kDegenerateDenominator = 1e-9;

struct Resonance {
  double eta = 0.0;
  bool boundary = false;  // a nu correction was unavailable
};

/// eta_res = lambda_tilde_{m,T} - lambda_tilde_{m-2,S}, T in m and S in m - 2.
Resonance resonance_frequency(const DressedBasis& dressed, int m, std::size_t t, std::size_t s);

/// Thermal photon distribution rho_m = nbar^m / (nbar + 1)^{m+1}.
double thermal_weight(double nbar, int m);
/// P_{m,T} = rho_m |<phi_{m,T}|0,m>|^2.
double initial_population(const DressedBasis& dressed, double nbar, int m, std::size_t t);
/// P(m,T,S) = P_{m,T} - P_{m-2,S}.
double population_difference(const DressedBasis& dressed, double nbar, int m, std::size_t t, std::size_t s);

struct StateKey {
  int m = 0;
  std::size_t index = 0;
  auto operator<=>(const StateKey&) const = default;
};

struct PairKey {
  int m = 0;
  std::size_t t = 0;
  std::size_t s = 0;
  auto operator<=>(const PairKey&) const = default;
};

struct ToneKey {
  std::size_t tone = 0;
  int m = 0;  // subspace of the pair; for Theta, the upper subspace m + 2
  std::size_t t = 0;
  std::size_t s = 0;
  auto operator<=>(const ToneKey&) const = default;
};

/// Precomputed, immutable coefficient set for one (params, spec) pair.
struct RateTable {
  std::vector<DriveTone> tones;
  ToneClass classes;
  int m_lo = 0;
  int m_hi = 0;
  std::map<PairKey, Complex> sigma;      // m in [m_lo, m_hi], T != S
  std::map<ToneKey, Complex> xi;         // slow tones
  std::map<ToneKey, Complex> theta;      // fast tones, upper subspace in [m_lo + 2, m_hi]
  std::map<PairKey, Resonance> resonances;  // (m, T in m, S in m - 2)
};

/// Builds the table for m in [m_lo, m_hi]. `dressed` must carry nu
/// corrections and hold subspace m_hi + 2.
RateTable build_rate_table(const ModulationSpec& spec, const DressedBasis& dressed, int m_lo, int m_hi);
/// Same with a classification made elsewhere, e.g. over the subspaces that
/// carry the population, when gaps deep in the thermal tail would make the
/// classification over [m_lo, m_hi] ambiguous.
RateTable build_rate_table(const ModulationSpec& spec, const DressedBasis& dressed, int m_lo, int m_hi,
                           const ToneClass& classes);

}  // namespace adce
