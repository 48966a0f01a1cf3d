#include "adce/exact.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

#include "adce/csv.hpp"
#include "adce/error.hpp"
#include "adce/parallel.hpp"

namespace adce {

namespace {

constexpr std::size_t kResyncSteps = 256;

// Plain complex products; std::complex operator* carries NaN/inf recovery that
// dominates the inner loop.
inline Complex mul(Complex a, Complex b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}
inline Complex mul_conj(Complex a, Complex b) {  // conj(a) * b
  return {a.real() * b.real() + a.imag() * b.imag(), a.real() * b.imag() - a.imag() * b.real()};
}

// Operator with a fixed sparsity pattern: static part plus one value array per
// modulated target, in compressed-row form over one parity sector.
struct SectorOperator {
  std::vector<std::size_t> row_ptr;
  std::vector<std::size_t> col;
  std::vector<double> base;
  std::vector<std::vector<double>> modulated;  // parallel to Impl::targets
};

// Coupling between local states i = |k, n> and j = |k+1, n -/+ 1>; type is
// 2k for the rotating and 2k+1 for the counter-rotating partner.
struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t type = 0;
  double amplitude = 0.0;
};

struct Sector {
  std::vector<std::size_t> members;  // canonical basis indices
  Eigen::MatrixXd frame;             // columns: frame vectors over `members`
  Eigen::VectorXd lambda;            // frame frequencies
  SectorOperator op;
  std::vector<Edge> edges;           // interaction frame only
  std::vector<std::size_t> cutoff;   // local indices with photons == n_max
};

// (a + a^dagger)(sigma_{k+1,k} + sigma_{k,k+1}) for one level pair k.
Eigen::MatrixXd coupling_operator(const Basis& basis, int k) {
  const auto dim = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto& s = basis[i];
    if (s.atom != k) continue;
    const auto ii = static_cast<Eigen::Index>(i);
    if (s.photons >= 1) {
      const auto j = static_cast<Eigen::Index>(basis.index_of(k + 1, s.photons - 1));
      x(ii, j) = x(j, ii) = std::sqrt(static_cast<double>(s.photons));
    }
    if (basis.contains(k + 1, s.photons + 1)) {
      const auto j = static_cast<Eigen::Index>(basis.index_of(k + 1, s.photons + 1));
      x(ii, j) = x(j, ii) = std::sqrt(static_cast<double>(s.photons + 1));
    }
  }
  return x;
}

Eigen::MatrixXd projector_operator(const Basis& basis, int k) {
  const auto dim = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (basis[i].atom == k) p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
  }
  return p;
}

Eigen::MatrixXd restrict(const Eigen::MatrixXd& full, const std::vector<std::size_t>& members) {
  const auto n = static_cast<Eigen::Index>(members.size());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      out(a, b) = full(static_cast<Eigen::Index>(members[static_cast<std::size_t>(a)]),
                       static_cast<Eigen::Index>(members[static_cast<std::size_t>(b)]));
    }
  }
  return out;
}

double max_row_sum(const Eigen::MatrixXd& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

}  // namespace

std::string_view to_string(Frame frame) {
  switch (frame) {
    case Frame::Interaction: return "interaction";
    case Frame::Dressed: return "dressed";
    case Frame::Lab: return "lab";
  }
  return "unknown";
}

PureState fock_state(const Basis& basis, int atom, int photons) {
  PureState s;
  s.amplitudes = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
  s.amplitudes[static_cast<Eigen::Index>(basis.index_of(atom, photons))] = 1.0;
  return s;
}

int thermal_cutoff(double nbar, double tail_tol) {
  if (nbar < 0.0) throw InvalidArgument("thermal mean photon number must be non-negative");
  if (!(tail_tol > 0.0 && tail_tol < 1.0)) throw InvalidArgument("tail tolerance must lie in (0, 1)");
  if (nbar == 0.0) return 1;
  const double q = nbar / (nbar + 1.0);
  int m = static_cast<int>(std::ceil(std::log(tail_tol) / std::log(q)));
  // Guard against rounding at an exact power.
  while (m > 1 && std::pow(q, m - 1) <= tail_tol) --m;
  while (std::pow(q, m) > tail_tol) ++m;
  return std::max(m, 1);
}

ThermalEnsemble thermal_ensemble(double nbar, double tail_tol) {
  ThermalEnsemble e;
  e.nbar = nbar;
  const int m_count = thermal_cutoff(nbar, tail_tol);
  double total = 0.0;
  for (int m = 0; m < m_count; ++m) {
    const double w = nbar == 0.0 ? (m == 0 ? 1.0 : 0.0) : std::exp(m * std::log(nbar) - (m + 1) * std::log1p(nbar));
    e.members.push_back({w, m});
    total += w;
  }
  e.deficit = 1.0 - total;
  return e;
}

struct Propagator::Impl {
  SystemParams params;
  ModulationSpec spec;
  Basis basis;
  Frame frame;
  std::vector<Target> targets;  // active modulation targets
  std::array<Sector, 2> sectors;
  std::array<double, 2> rotating_rate{};  // 1 + E0_k - E0_{k+1}
  std::array<double, 2> counter_rate{};   // -1 + E0_k - E0_{k+1}
  double lambda_max = 0.0;

  Impl(const SystemParams& p, const ModulationSpec& s, const Basis& b, Frame f)
      : params(p), spec(s), basis(b), frame(f) {}

  void build();
  void build_interaction(Sector& sec);
  // Phase theta_a(t) with psi = frame * exp(-i theta) * y.
  double frame_phase(const Sector& sec, std::size_t a, double t) const {
    switch (frame) {
      case Frame::Lab: return 0.0;
      case Frame::Dressed: return sec.lambda[static_cast<Eigen::Index>(a)] * t;
      case Frame::Interaction: break;
    }
    const auto& s = basis[sec.members[a]];
    double phase = (params.omega0 * s.photons + params.E0[static_cast<std::size_t>(s.atom)]) * t;
    if (s.atom == 1) phase += modulation_integral(spec, Target::E1, t);
    if (s.atom == 2) phase += modulation_integral(spec, Target::E2, t);
    return phase;
  }
  double modulation(std::size_t target_slot, double t) const {
    return modulation_value(spec, targets[target_slot], 0.0, t);
  }
  // Stops early (returning false) once a sector's norm drift exceeds abort_drift.
  bool run_once(const std::array<Eigen::VectorXcd, 2>& initial, const PropagationControls& c, double h_target,
                double abort_drift, Trajectory& traj) const;
};

void Propagator::Impl::build() {
  params.validate();
  spec.validate();
  for (Target t : kAllTargets) {
    if (spec[t].active()) targets.push_back(t);
  }
  for (std::size_t k = 0; k < 2; ++k) {
    rotating_rate[k] = params.omega0 + params.E0[k] - params.E0[k + 1];
    counter_rate[k] = -params.omega0 + params.E0[k] - params.E0[k + 1];
  }
  const OperatorMatrix h0 = hamiltonian_bare(params, basis);
  const OperatorMatrix hfull = hamiltonian_full(params, ModulationSpec{}, 0.0, basis);
  const Eigen::MatrixXd h0r = h0.entries.real();
  const Eigen::MatrixXd static_full = hfull.entries.real();
  std::vector<Eigen::MatrixXd> mod_full;
  for (Target t : targets) {
    switch (t) {
      case Target::E1: mod_full.push_back(projector_operator(basis, 1)); break;
      case Target::E2: mod_full.push_back(projector_operator(basis, 2)); break;
      case Target::G0: mod_full.push_back(coupling_operator(basis, 0)); break;
      case Target::G1: mod_full.push_back(coupling_operator(basis, 1)); break;
    }
  }

  double max_eta = 0.0;
  double mod_bound = 0.0;
  for (std::size_t l = 0; l < targets.size(); ++l) {
    for (const auto& tone : spec[targets[l]].tones) max_eta = std::max(max_eta, tone.frequency);
  }

  for (int parity = 0; parity < 2; ++parity) {
    Sector& sec = sectors[static_cast<std::size_t>(parity)];
    for (int n = parity; n <= basis.max_excitation(); n += 2) {
      for (std::size_t idx : basis.subspace(n)) sec.members.push_back(idx);
    }
    const auto dim = static_cast<Eigen::Index>(sec.members.size());
    sec.frame = Eigen::MatrixXd::Identity(dim, dim);
    sec.lambda = Eigen::VectorXd::Zero(dim);
    for (std::size_t a = 0; a < sec.members.size(); ++a) {
      if (basis[sec.members[a]].photons == basis.n_max()) sec.cutoff.push_back(a);
    }
    if (frame == Frame::Interaction) {
      build_interaction(sec);
      continue;
    }
    Eigen::MatrixXd generator = restrict(static_full, sec.members);
    if (frame == Frame::Dressed) {
      // Block-diagonalize H0 subspace by subspace (members are grouped by N).
      Eigen::Index offset = 0;
      for (int n = parity; n <= basis.max_excitation(); n += 2) {
        const auto g = static_cast<Eigen::Index>(basis.subspace(n).size());
        if (g == 0) continue;
        const Eigen::MatrixXd block = restrict(h0r, sec.members).block(offset, offset, g, g);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(block);
        if (solver.info() != Eigen::Success) throw NumericalFailure("frame diagonalization failed");
        sec.frame.block(offset, offset, g, g) = solver.eigenvectors();
        sec.lambda.segment(offset, g) = solver.eigenvalues();
        offset += g;
      }
      generator = sec.frame.transpose() * (generator - restrict(h0r, sec.members)) * sec.frame;
    }
    std::vector<Eigen::MatrixXd> mods;
    for (std::size_t l = 0; l < targets.size(); ++l) {
      mods.push_back(sec.frame.transpose() * restrict(mod_full[l], sec.members) * sec.frame);
      mod_bound = std::max(mod_bound, std::abs(spec[targets[l]].depth) * max_row_sum(mods.back()));
    }

    // Union sparsity pattern; entries that are structurally zero come out as exact zeros.
    double max_phase_rate = 0.0;
    sec.op.row_ptr.push_back(0);
    sec.op.modulated.resize(targets.size());
    for (Eigen::Index a = 0; a < dim; ++a) {
      for (Eigen::Index b = 0; b < dim; ++b) {
        bool nonzero = generator(a, b) != 0.0;
        for (const auto& m : mods) nonzero = nonzero || m(a, b) != 0.0;
        if (!nonzero) continue;
        sec.op.col.push_back(static_cast<std::size_t>(b));
        sec.op.base.push_back(generator(a, b));
        for (std::size_t l = 0; l < mods.size(); ++l) sec.op.modulated[l].push_back(mods[l](a, b));
        max_phase_rate = std::max(max_phase_rate, std::abs(sec.lambda[a] - sec.lambda[b]));
      }
      sec.op.row_ptr.push_back(sec.op.col.size());
    }
    const double bound = max_phase_rate + max_eta + max_row_sum(generator) + mod_bound;
    lambda_max = std::max(lambda_max, bound);
  }
}

void Propagator::Impl::build_interaction(Sector& sec) {
  std::vector<std::size_t> local(basis.size(), basis.size());
  for (std::size_t a = 0; a < sec.members.size(); ++a) local[sec.members[a]] = a;
  std::vector<double> row(sec.members.size(), 0.0);
  std::array<double, 2> g_bound{};
  for (int k = 0; k < 2; ++k) {
    const Target t = k == 0 ? Target::G0 : Target::G1;
    g_bound[static_cast<std::size_t>(k)] = std::abs(params.G0[static_cast<std::size_t>(k)]) + std::abs(spec[t].depth);
  }
  for (std::size_t a = 0; a < sec.members.size(); ++a) {
    const auto& s = basis[sec.members[a]];
    if (s.atom > 1) continue;
    for (int counter = 0; counter < 2; ++counter) {
      const int photons = counter == 0 ? s.photons - 1 : s.photons + 1;
      if (!basis.contains(s.atom + 1, photons)) continue;
      const std::size_t b = local[basis.index_of(s.atom + 1, photons)];
      const double amp = std::sqrt(static_cast<double>(counter == 0 ? s.photons : s.photons + 1));
      sec.edges.push_back({a, b, static_cast<std::size_t>(2 * s.atom + counter), amp});
      row[a] += g_bound[static_cast<std::size_t>(s.atom)] * amp;
      row[b] += g_bound[static_cast<std::size_t>(s.atom)] * amp;
    }
  }
  const std::array<double, 3> e_dev{0.0, std::abs(spec[Target::E1].depth), std::abs(spec[Target::E2].depth)};
  double phase_rate = 0.0;
  for (std::size_t k = 0; k < 2; ++k) {
    const double drift = e_dev[k] + e_dev[k + 1];
    phase_rate = std::max({phase_rate, std::abs(rotating_rate[k]) + drift, std::abs(counter_rate[k]) + drift});
  }
  const double coupling = row.empty() ? 0.0 : *std::max_element(row.begin(), row.end());
  lambda_max = std::max(lambda_max, phase_rate + coupling);
}

// Fixed-step RK4 over one parity sector. `prepare(t, h)` sets up the
// time-dependent coefficients for the stage times t, t + h/2, t + h, and
// `deriv(stage, in, out)` evaluates the right-hand side at stage 0, 1 or 2.
template <class Prepare, class Deriv, class Record>
bool rk4_sector(std::vector<Complex>& y, const std::vector<double>& times, std::size_t sub, double h,
                Prepare&& prepare, Deriv&& deriv, Record&& record, std::size_t& steps) {
  const std::size_t dim = y.size();
  std::vector<Complex> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
  if (!record(0)) return false;
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double t_start = times[k - 1];
    for (std::size_t step = 0; step < sub; ++step) {
      prepare(t_start + static_cast<double>(step) * h, h, step);
      deriv(0, y, k1);
      for (std::size_t a = 0; a < dim; ++a) tmp[a] = y[a] + 0.5 * h * k1[a];
      deriv(1, tmp, k2);
      for (std::size_t a = 0; a < dim; ++a) tmp[a] = y[a] + 0.5 * h * k2[a];
      deriv(1, tmp, k3);
      for (std::size_t a = 0; a < dim; ++a) tmp[a] = y[a] + h * k3[a];
      deriv(2, tmp, k4);
      for (std::size_t a = 0; a < dim; ++a) y[a] += (h / 6.0) * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
    }
    steps += sub;
    if (!record(k)) return false;
  }
  return true;
}

bool Propagator::Impl::run_once(const std::array<Eigen::VectorXcd, 2>& initial, const PropagationControls& c,
                                double h_target, double abort_drift, Trajectory& traj) const {
  const auto samples = static_cast<std::size_t>(std::floor(c.t_end / c.dt_out + 1e-9)) + 1;
  const auto sub = static_cast<std::size_t>(std::max(1.0, std::ceil(c.dt_out / h_target - 1e-9)));
  const double h = c.dt_out / static_cast<double>(sub);

  traj = Trajectory{};
  traj.step = h;
  traj.times.resize(samples);
  for (std::size_t k = 0; k < samples; ++k) traj.times[k] = static_cast<double>(k) * c.dt_out;
  traj.states.assign(samples, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size())));
  std::vector<double> norms(samples, 0.0);
  std::vector<double> leak(samples, 0.0);
  const std::size_t n_targets = targets.size();

  for (std::size_t p = 0; p < 2; ++p) {
    const Sector& sec = sectors[p];
    const Eigen::VectorXcd& psi0 = initial[p];
    if (psi0.squaredNorm() == 0.0) continue;
    const std::size_t dim = sec.members.size();

    // Frame amplitudes at t = 0, where every frame phase vanishes.
    Eigen::VectorXcd c0 = sec.frame.transpose() * psi0;
    std::vector<Complex> y(c0.data(), c0.data() + dim);

    const double sector_norm = psi0.norm();
    auto record = [&](std::size_t k) {
      const double t = traj.times[k];
      Eigen::VectorXcd local(static_cast<Eigen::Index>(dim));
      double nrm = 0.0;
      for (std::size_t a = 0; a < dim; ++a) {
        local[static_cast<Eigen::Index>(a)] = std::polar(1.0, -frame_phase(sec, a, t)) * y[a];
        nrm += std::norm(y[a]);
      }
      const Eigen::VectorXcd psi = sec.frame * local;
      double cut = 0.0;
      for (std::size_t a : sec.cutoff) cut += std::norm(psi[static_cast<Eigen::Index>(a)]);
      for (std::size_t a = 0; a < dim; ++a) {
        traj.states[k][static_cast<Eigen::Index>(sec.members[a])] = psi[static_cast<Eigen::Index>(a)];
      }
      norms[k] += nrm;
      leak[k] += cut;
      return std::abs(std::sqrt(nrm) - sector_norm) <= abort_drift;
    };

    bool finished = false;
    if (frame == Frame::Interaction) {
      // Edge weights G_k(t) exp(i theta_type(t)) at the three stage times.
      std::array<std::array<Complex, 4>, 3> w{};
      auto prepare = [&](double t, double step, std::size_t index) {
        // The end stage of one step is the start stage of the next.
        int first = 0;
        if (index > 0) {
          w[0] = w[2];
          first = 1;
        }
        for (int stage = first; stage < 3; ++stage) {
          const double ts = t + 0.5 * step * stage;
          const std::array<double, 2> coupling{modulation_value(spec, Target::G0, params.G0[0], ts),
                                               modulation_value(spec, Target::G1, params.G0[1], ts)};
          const std::array<double, 3> g{0.0, modulation_integral(spec, Target::E1, ts),
                                        modulation_integral(spec, Target::E2, ts)};
          for (int type = 0; type < 4; ++type) {
            const int k = type / 2;
            const double rate = type % 2 == 0 ? rotating_rate[static_cast<std::size_t>(k)]
                                              : counter_rate[static_cast<std::size_t>(k)];
            const double theta = rate * ts + g[static_cast<std::size_t>(k)] - g[static_cast<std::size_t>(k + 1)];
            w[static_cast<std::size_t>(stage)][static_cast<std::size_t>(type)] =
                std::polar(coupling[static_cast<std::size_t>(k)], theta);
          }
        }
      };
      auto deriv = [&](int stage, const std::vector<Complex>& in, std::vector<Complex>& out) {
        std::fill(out.begin(), out.end(), Complex{0.0, 0.0});
        const auto& ws = w[static_cast<std::size_t>(stage)];
        for (const auto& e : sec.edges) {
          const Complex we = e.amplitude * ws[e.type];
          const Complex a = mul(we, in[e.j]);
          const Complex b = mul_conj(we, in[e.i]);
          out[e.i] += Complex{a.imag(), -a.real()};
          out[e.j] += Complex{b.imag(), -b.real()};
        }
      };
      finished = rk4_sector(y, traj.times, sub, h, prepare, deriv, record, traj.steps);
    } else {
      const std::size_t nnz = sec.op.col.size();
      std::vector<Complex> u(dim), r_half(dim);
      std::array<std::vector<Complex>, 3> d;
      for (auto& v : d) v.resize(dim);
      std::array<std::vector<double>, 3> vals;
      for (auto& v : vals) v.resize(nnz);
      for (std::size_t a = 0; a < dim; ++a) r_half[a] = std::polar(1.0, sec.lambda[static_cast<Eigen::Index>(a)] * 0.5 * h);
      auto prepare = [&](double t, double step, std::size_t index) {
        if (index % kResyncSteps == 0) {
          for (std::size_t a = 0; a < dim; ++a) d[0][a] = std::polar(1.0, sec.lambda[static_cast<Eigen::Index>(a)] * t);
        } else {
          std::swap(d[0], d[2]);
        }
        for (std::size_t a = 0; a < dim; ++a) {
          d[1][a] = mul(d[0][a], r_half[a]);
          d[2][a] = mul(d[1][a], r_half[a]);
        }
        for (int stage = 0; stage < 3; ++stage) {
          auto& v = vals[static_cast<std::size_t>(stage)];
          std::copy(sec.op.base.begin(), sec.op.base.end(), v.begin());
          for (std::size_t l = 0; l < n_targets; ++l) {
            const double f = modulation(l, t + 0.5 * step * stage);
            if (f == 0.0) continue;
            const auto& mv = sec.op.modulated[l];
            for (std::size_t z = 0; z < nnz; ++z) v[z] += f * mv[z];
          }
        }
      };
      auto deriv = [&](int stage, const std::vector<Complex>& in, std::vector<Complex>& out) {
        const auto& ds = d[static_cast<std::size_t>(stage)];
        const auto& vs = vals[static_cast<std::size_t>(stage)];
        for (std::size_t a = 0; a < dim; ++a) u[a] = mul_conj(ds[a], in[a]);
        for (std::size_t a = 0; a < dim; ++a) {
          double re = 0.0;
          double im = 0.0;
          for (std::size_t z = sec.op.row_ptr[a]; z < sec.op.row_ptr[a + 1]; ++z) {
            const Complex v = u[sec.op.col[z]];
            re += vs[z] * v.real();
            im += vs[z] * v.imag();
          }
          const Complex r = mul(ds[a], Complex{re, im});
          out[a] = Complex{r.imag(), -r.real()};  // -i * r
        }
      };
      finished = rk4_sector(y, traj.times, sub, h, prepare, deriv, record, traj.steps);
    }
    if (!finished) return false;
  }

  const double n0 = std::sqrt(norms[0]);
  for (std::size_t k = 0; k < samples; ++k) {
    traj.norm_drift = std::max(traj.norm_drift, std::abs(std::sqrt(norms[k]) - n0));
    traj.leakage = std::max(traj.leakage, leak[k]);
  }
  return true;
}

Propagator::Propagator(const SystemParams& params, const ModulationSpec& spec, const Basis& basis, Frame frame)
    : impl_(std::make_unique<Impl>(params, spec, basis, frame)) {
  impl_->build();
}
Propagator::~Propagator() = default;
Propagator::Propagator(Propagator&&) noexcept = default;
Propagator& Propagator::operator=(Propagator&&) noexcept = default;

const Basis& Propagator::basis() const { return impl_->basis; }
Frame Propagator::frame() const { return impl_->frame; }
double Propagator::lambda_max() const { return impl_->lambda_max; }

Trajectory Propagator::run(const PureState& initial, const PropagationControls& c) const {
  if (!(c.t_end > 0.0)) throw InvalidArgument("t_end must be positive");
  if (!(c.dt_out > 0.0)) throw InvalidArgument("dt_out must be positive");
  if (initial.amplitudes.size() != static_cast<Eigen::Index>(impl_->basis.size())) {
    throw InvalidArgument("initial state dimension does not match the basis");
  }
  std::array<Eigen::VectorXcd, 2> split;
  for (std::size_t p = 0; p < 2; ++p) {
    const auto& members = impl_->sectors[p].members;
    split[p].resize(static_cast<Eigen::Index>(members.size()));
    for (std::size_t a = 0; a < members.size(); ++a) {
      split[p][static_cast<Eigen::Index>(a)] = initial.amplitudes[static_cast<Eigen::Index>(members[a])];
    }
  }

  Trajectory traj;
  if (c.fixed_step > 0.0) {
    impl_->run_once(split, c, c.fixed_step, HUGE_VAL, traj);
  } else {
    const double h0 = c.step_factor / impl_->lambda_max;
    bool accepted = false;
    for (int r = 0; r <= c.max_refinements; ++r) {
      const bool finished = impl_->run_once(split, c, h0 / std::pow(2.0, r), c.norm_tol, traj);
      traj.refinements = r;
      if (finished && traj.norm_drift <= c.norm_tol) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw NumericalFailure("norm drift " + std::to_string(traj.norm_drift) + " exceeds tolerance after " +
                             std::to_string(c.max_refinements) + " step refinements");
    }
  }
  if (traj.leakage > c.leakage_tol) {
    throw NumericalFailure("population " + std::to_string(traj.leakage) + " reached the photon cutoff n_max=" +
                           std::to_string(impl_->basis.n_max()) + "; increase n_max");
  }
  return traj;
}

Trajectory propagate(const PureState& initial, const SystemParams& params, const ModulationSpec& spec,
                     const Basis& basis, const PropagationControls& controls) {
  return Propagator(params, spec, basis, controls.frame).run(initial, controls);
}

std::vector<NamedProjector> dressed_projectors(const DressedBasis& dressed, const Basis& basis,
                                               const std::vector<std::pair<int, Label>>& states) {
  std::vector<NamedProjector> out;
  for (const auto& [m, label] : states) {
    const auto& s = dressed.state(m, label);
    out.push_back({"P(" + std::to_string(m) + "," + s.tag() + ")", dressed.embed(s, basis)});
  }
  return out;
}

TimeSeries observables(const Trajectory& trajectory, const Basis& basis,
                       const std::vector<NamedProjector>& projectors) {
  TimeSeries series;
  series.times = trajectory.times;
  series.add_column("n_ph", "1");
  series.add_column("n_at", "1");
  series.add_column("n_tot", "1");
  for (const auto& p : projectors) series.add_column(p.name, "1");
  Column* cph = &series.columns[0];
  Column* cat = &series.columns[1];
  Column* ctot = &series.columns[2];

  for (std::size_t k = 0; k < trajectory.times.size(); ++k) {
    const auto& psi = trajectory.states[k];
    double ph = 0.0;
    double at = 0.0;
    for (std::size_t i = 0; i < basis.size(); ++i) {
      const double pop = std::norm(psi[static_cast<Eigen::Index>(i)]);
      ph += pop * basis[i].photons;
      at += pop * basis[i].atom;
    }
    cph->values[k] = ph;
    cat->values[k] = at;
    ctot->values[k] = ph + at;
    for (std::size_t j = 0; j < projectors.size(); ++j) {
      series.columns[3 + j].values[k] = std::norm(projectors[j].vector.dot(psi));
    }
  }
  return series;
}

TimeSeries run_ensemble(const ThermalEnsemble& ensemble, const Propagator& propagator,
                        const PropagationControls& controls, const std::vector<NamedProjector>& projectors,
                        unsigned threads) {
  const Basis& basis = propagator.basis();
  const auto& members = ensemble.members;
  for (const auto& m : members) {
    if (m.photons + 4 > basis.n_max()) {
      throw InvalidArgument("photon cutoff n_max=" + std::to_string(basis.n_max()) +
                            " leaves less than 4 photons of headroom above member m=" + std::to_string(m.photons));
    }
  }
  std::vector<TimeSeries> results(members.size());
  std::vector<Trajectory> info(members.size());
  parallel_for(members.size(), threads, [&](std::size_t i) {
    PropagationControls c = controls;
    if (members[i].weight > 0.0) c.leakage_tol = controls.leakage_tol / members[i].weight;
    Trajectory traj = propagator.run(fock_state(basis, 0, members[i].photons), c);
    results[i] = observables(traj, basis, projectors);
    info[i].norm_drift = traj.norm_drift;
    info[i].leakage = traj.leakage * members[i].weight;
    info[i].step = traj.step;
    info[i].refinements = traj.refinements;
    info[i].steps = traj.steps;
  });

  TimeSeries total;
  if (members.empty()) return total;
  total.times = results.front().times;
  for (const auto& col : results.front().columns) total.add_column(col.name, col.unit);
  double drift = 0.0;
  double leak = 0.0;
  double min_step = info.front().step;
  std::size_t steps = 0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t c = 0; c < total.columns.size(); ++c) {
      auto& dst = total.columns[c].values;
      const auto& src = results[i].columns[c].values;
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += members[i].weight * src[k];
    }
    drift = std::max(drift, info[i].norm_drift);
    leak += info[i].leakage;
    min_step = std::min(min_step, info[i].step);
    steps += info[i].steps;
  }
  total.metadata["members"] = std::to_string(members.size());
  total.metadata["truncation_deficit"] = format_double(ensemble.deficit);
  total.metadata["max_norm_drift"] = format_double(drift);
  total.metadata["weighted_cutoff_population"] = format_double(leak);
  total.metadata["min_step"] = format_double(min_step);
  total.metadata["rk4_steps"] = std::to_string(steps);
  total.metadata["frame"] = std::string(to_string(propagator.frame()));
  return total;
}

}  // namespace adce
