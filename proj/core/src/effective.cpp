#include "adce/effective.hpp"

#include <boost/numeric/odeint.hpp>

#include <cmath>
#include <string>

#include "adce/csv.hpp"
#include "adce/error.hpp"

namespace adce {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<Complex>;

std::string state_name(const DressedBasis& dressed, const StateKey& key) {
  return "P(" + std::to_string(key.m) + "," + dressed.subspace(key.m)[key.index].tag() + ")";
}

}  // namespace

std::size_t EffectiveSystem::position(int m, std::size_t index) const {
  for (std::size_t p = 0; p < ladder.size(); ++p) {
    if (ladder[p].m == m && ladder[p].index == index) return p;
  }
  throw InvalidArgument("state (" + std::to_string(m) + ", #" + std::to_string(index) + ") is not in the ladder");
}

EffectiveSystem build_effective_system(const RateTable& rates, const DressedBasis& dressed, int m_min, int m_max,
                                       const std::vector<std::pair<StateKey, Complex>>& initial,
                                       const EffectiveOptions& options) {
  if (m_min < rates.m_lo || m_max > rates.m_hi || m_min > m_max) {
    throw InvalidArgument("effective ladder [" + std::to_string(m_min) + "," + std::to_string(m_max) +
                          "] not covered by the rate table");
  }
  EffectiveSystem sys;
  for (int m = m_min; m <= m_max; m += 2) {
    for (std::size_t t = 0; t < dressed.subspace(m).size(); ++t) {
      sys.ladder.push_back({m, t});
      sys.names.push_back(state_name(dressed, {m, t}));
      sys.lambda_tilde.push_back(dressed.subspace(m)[t].lambda_tilde);
      sys.excitation.push_back(m);
    }
  }
  for (const auto& tone : rates.tones) sys.tone_frequencies.push_back(tone.frequency);
  sys.initial = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(sys.ladder.size()));
  for (const auto& [key, amp] : initial) {
    sys.initial[static_cast<Eigen::Index>(sys.position(key.m, key.index))] += amp;
  }

  auto lt = [&](int m, std::size_t t) { return dressed.subspace(m)[t].lambda_tilde; };

  for (int m = m_min; m <= m_max; m += 2) {
    const std::size_t g = dressed.subspace(m).size();
    for (std::size_t t = 0; t < g; ++t) {
      const std::size_t i = sys.position(m, t);
      for (std::size_t s = 0; s < g; ++s) {
        if (s == t) continue;
        const std::size_t j = sys.position(m, s);
        Complex sig = rates.sigma.at({m, t, s});
        if (options.antihermitian_sigma) sig = 0.5 * (sig - std::conj(rates.sigma.at({m, s, t})));
        sys.couplings.push_back({i, j, sig, lt(m, t) - lt(m, s), kNoTone, 0});
        for (std::size_t tone = 0; tone < rates.tones.size(); ++tone) {
          if (rates.classes.kinds[tone] != ToneKind::Slow) continue;
          const int varpi = lt(m, t) >= lt(m, s) ? 1 : -1;
          const double omega = varpi * (std::abs(lt(m, t) - lt(m, s)) - rates.tones[tone].frequency);
          sys.couplings.push_back({i, j, rates.xi.at({tone, m, t, s}), omega, tone, -varpi});
        }
      }
    }
    if (m + 2 > m_max) continue;
    const std::size_t g_up = dressed.subspace(m + 2).size();
    for (std::size_t tone = 0; tone < rates.tones.size(); ++tone) {
      if (rates.classes.kinds[tone] != ToneKind::Fast) continue;
      const double eta = rates.tones[tone].frequency;
      for (std::size_t t = 0; t < g; ++t) {
        for (std::size_t s = 0; s < g_up; ++s) {
          const Complex theta = rates.theta.at({tone, m + 2, t, s});
          if (theta == 0.0) continue;
          const std::size_t lower = sys.position(m, t);
          const std::size_t upper = sys.position(m + 2, s);
          const double detuning = lt(m + 2, s) - lt(m, t) - eta;
          sys.couplings.push_back({lower, upper, theta, -detuning, tone, 1});
          sys.couplings.push_back({upper, lower, -std::conj(theta), detuning, tone, -1});
        }
      }
    }
  }
  return sys;
}

namespace {

// exp(i omega t) for every coupling from per-state and per-tone phasors,
// avoiding one sincos per coupling.
class PhaseCache {
 public:
  explicit PhaseCache(const EffectiveSystem& system)
      : system_(system), state_(system.lambda_tilde.size()), tone_(system.tone_frequencies.size()) {}

  void update(double t) {
    for (std::size_t a = 0; a < state_.size(); ++a) state_[a] = std::polar(1.0, system_.lambda_tilde[a] * t);
    for (std::size_t a = 0; a < tone_.size(); ++a) tone_[a] = std::polar(1.0, system_.tone_frequencies[a] * t);
  }

  Complex factor(const EffectiveCoupling& c) const {
    Complex f = state_[c.i] * std::conj(state_[c.j]);
    if (c.tone_sign > 0) f *= tone_[c.tone];
    if (c.tone_sign < 0) f *= std::conj(tone_[c.tone]);
    return f;
  }

 private:
  const EffectiveSystem& system_;
  std::vector<Complex> state_;
  std::vector<Complex> tone_;
};

}  // namespace

void effective_rhs(const EffectiveSystem& system, const Eigen::VectorXcd& b, double t, Eigen::VectorXcd& out) {
  PhaseCache cache(system);
  cache.update(t);
  out = Eigen::VectorXcd::Zero(b.size());
  for (const auto& c : system.couplings) {
    out[static_cast<Eigen::Index>(c.i)] += c.c * cache.factor(c) * b[static_cast<Eigen::Index>(c.j)];
  }
}

TimeSeries integrate_effective(const EffectiveSystem& system, const EffectiveControls& controls) {
  if (!(controls.t_end > 0.0)) throw InvalidArgument("t_end must be positive");
  if (!(controls.dt_out > 0.0)) throw InvalidArgument("dt_out must be positive");

  const auto n = static_cast<std::size_t>(system.initial.size());
  State x(system.initial.data(), system.initial.data() + n);

  PhaseCache cache(system);
  auto rhs = [&system, &cache](const State& b, State& db, double t) {
    cache.update(t);
    std::fill(db.begin(), db.end(), Complex{0.0, 0.0});
    for (const auto& c : system.couplings) db[c.i] += c.c * cache.factor(c) * b[c.j];
  };

  TimeSeries series;
  const auto samples = static_cast<std::size_t>(std::floor(controls.t_end / controls.dt_out + 1e-9)) + 1;
  for (std::size_t k = 0; k < samples; ++k) series.times.push_back(static_cast<double>(k) * controls.dt_out);
  std::vector<std::vector<double>> pops(n, std::vector<double>(samples));
  std::vector<double> norm(samples);
  std::vector<double> n_tot(samples);
  std::size_t cursor = 0;
  auto observer = [&](const State& b, double) {
    double total = 0.0;
    double excitations = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      pops[i][cursor] = std::norm(b[i]);
      total += pops[i][cursor];
      excitations += system.excitation[i] * pops[i][cursor];
    }
    norm[cursor] = total;
    n_tot[cursor] = excitations;
    ++cursor;
  };

  auto stepper = odeint::make_controlled(controls.abs_tol, controls.rel_tol, odeint::runge_kutta_dopri5<State>());
  try {
    odeint::integrate_times(stepper, rhs, x, series.times.begin(), series.times.end(),
                            std::min(controls.dt_out, 0.1), observer, odeint::max_step_checker(1000000));
  } catch (const odeint::odeint_error& e) {
    throw NumericalFailure(std::string("effective integrator failed: ") + e.what());
  }

  for (std::size_t i = 0; i < n; ++i) {
    auto& col = series.add_column(system.names[i], "1");
    col.values = std::move(pops[i]);
  }
  series.add_column("n_tot", "1").values = std::move(n_tot);
  series.add_column("norm", "1").values = std::move(norm);
  series.metadata["integrator"] = "dopri5";
  series.metadata["abs_tol"] = format_double(controls.abs_tol);
  series.metadata["rel_tol"] = format_double(controls.rel_tol);
  return series;
}

}  // namespace adce
