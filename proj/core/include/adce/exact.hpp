#pragma once

// Time-dependent Schroedinger propagation of the full Hamiltonian with a
// thermal-ensemble initial state.

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "adce/dressed.hpp"
#include "adce/hilbert.hpp"
#include "adce/timeseries.hpp"

namespace adce {

struct PureState {
  Eigen::VectorXcd amplitudes;
  double norm() const { return amplitudes.norm(); }
};

/// |atom, photons> in the canonical basis.
PureState fock_state(const Basis& basis, int atom, int photons);

struct ThermalMember {
  double weight = 0.0;  // rho_m
  int photons = 0;      // initial state |0, m>
};

struct ThermalEnsemble {
  double nbar = 0.0;
  std::vector<ThermalMember> members;
  double deficit = 0.0;  // 1 - sum of weights, not renormalized away
};

/// Smallest M with (nbar / (nbar + 1))^M <= tail_tol (1 for nbar = 0).
int thermal_cutoff(double nbar, double tail_tol);
/// Fock members 0..M-1 with thermal weights.
ThermalEnsemble thermal_ensemble(double nbar, double tail_tol);

/// Frame the RK4 integration runs in. Interaction: rotating with the diagonal
/// of H(t), so only the couplings are integrated and the energy modulation
/// enters through analytic phases. Dressed: interaction picture of H0 with
/// the block eigenvectors as frame. Lab: the Schroedinger picture. The last
/// two are independent cross-check routes.
enum class Frame { Interaction, Dressed, Lab };

std::string_view to_string(Frame frame);

struct PropagationControls {
  double t_end = 0.0;
  double dt_out = 1.0;
  double step_factor = 0.1;   // h * lambda_max <= step_factor
  double fixed_step = 0.0;    // > 0 forces this step (rounded to divide dt_out), no refinement
  double norm_tol = 1e-8;
  int max_refinements = 4;    // step halvings attempted when norm drift exceeds norm_tol
  double leakage_tol = 1e-6;  // population allowed on the photon cutoff
  Frame frame = Frame::Interaction;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXcd> states;  // Schroedinger-picture amplitudes over the Basis
  double step = 0.0;
  double norm_drift = 0.0;  // max ||psi| - 1| over samples
  double leakage = 0.0;     // max population with photons == n_max
  int refinements = 0;
  std::size_t steps = 0;
};

/// Precomputed frame and operator data for one (params, spec, basis).
/// Immutable after construction; run() may be called concurrently.
class Propagator {
 public:
  Propagator(const SystemParams& params, const ModulationSpec& spec, const Basis& basis,
             Frame frame = Frame::Interaction);
  ~Propagator();
  Propagator(Propagator&&) noexcept;
  Propagator& operator=(Propagator&&) noexcept;

  const Basis& basis() const;
  Frame frame() const;
  /// Frequency scale bounding the generator in the chosen frame.
  double lambda_max() const;

  /// Propagates to controls.t_end, refining the step until the norm drift is
  /// within norm_tol. Throws NumericalFailure on persistent drift or when the
  /// cutoff population exceeds leakage_tol.
  Trajectory run(const PureState& initial, const PropagationControls& controls) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Convenience wrapper constructing a Propagator.
Trajectory propagate(const PureState& initial, const SystemParams& params, const ModulationSpec& spec,
                     const Basis& basis, const PropagationControls& controls);

/// Dressed state to project on, embedded in the canonical basis.
struct NamedProjector {
  std::string name;
  Eigen::VectorXcd vector;
};

/// Projectors "P(m,tag)" for the requested (m, label) states of `dressed`.
std::vector<NamedProjector> dressed_projectors(const DressedBasis& dressed, const Basis& basis,
                                               const std::vector<std::pair<int, Label>>& states);

/// n_ph, n_at, n_tot and the projector populations along a trajectory.
TimeSeries observables(const Trajectory& trajectory, const Basis& basis,
                       const std::vector<NamedProjector>& projectors);

/// Ensemble propagation; observables are weighted sums over members
/// accumulated in member order. The leakage bound applies to the weighted
/// contribution, so each member gets leakage_tol / weight.
TimeSeries run_ensemble(const ThermalEnsemble& ensemble, const Propagator& propagator,
                        const PropagationControls& controls, const std::vector<NamedProjector>& projectors,
                        unsigned threads = 1);

}  // namespace adce
