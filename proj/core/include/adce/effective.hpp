#pragma once

// RWA effective amplitude equations for the dressed-state amplitudes b_{m,T}.

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

#include "adce/rates.hpp"
#include "adce/timeseries.hpp"

namespace adce {

inline constexpr std::size_t kNoTone = static_cast<std::size_t>(-1);

/// Contribution d b_i / dt += c * exp(i omega t) * b_j with
/// omega = lambda_tilde_i - lambda_tilde_j + tone_sign * eta_tone.
struct EffectiveCoupling {
  std::size_t i = 0;
  std::size_t j = 0;
  Complex c;
  double omega = 0.0;
  std::size_t tone = kNoTone;
  int tone_sign = 0;
};

struct EffectiveSystem {
  std::vector<StateKey> ladder;  // participating dressed states
  std::vector<std::string> names;
  std::vector<double> lambda_tilde;  // per ladder state
  std::vector<double> excitation;    // m per ladder state
  std::vector<double> tone_frequencies;
  std::vector<EffectiveCoupling> couplings;
  Eigen::VectorXcd initial;

  /// Position of (m, index) in the ladder; throws InvalidArgument when absent.
  std::size_t position(int m, std::size_t index) const;
};

struct EffectiveOptions {
  /// Replace varsigma by its anti-Hermitian part (S - S^dagger)/2 so that the
  /// truncated equations are norm preserving.
  bool antihermitian_sigma = true;
};

/// Encodes the varsigma, Xi (slow tones) and Theta (fast tones) terms among
/// the states of subspaces m_min, m_min + 2, ..., up to m_max. The equations
/// never mix parities, so only the parity of m_min is kept. Subspaces at the
/// ends couple only inward. `initial` lists amplitudes b_{m,T}(0); support outside the ladder
/// throws InvalidArgument.
EffectiveSystem build_effective_system(const RateTable& rates, const DressedBasis& dressed, int m_min, int m_max,
                                       const std::vector<std::pair<StateKey, Complex>>& initial,
                                       const EffectiveOptions& options = {});

struct EffectiveControls {
  double t_end = 0.0;
  double dt_out = 1.0;
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
};

/// Integrates with an adaptive Dormand-Prince scheme; columns are the ladder
/// populations |b|^2 (named "P(m,label)"), "n_tot" (sum of m |b|^2) and
/// "norm". Throws NumericalFailure
/// when the step size collapses.
TimeSeries integrate_effective(const EffectiveSystem& system, const EffectiveControls& controls);

/// Right-hand side evaluation, exposed for tests.
void effective_rhs(const EffectiveSystem& system, const Eigen::VectorXcd& b, double t, Eigen::VectorXcd& out);

}  // namespace adce
