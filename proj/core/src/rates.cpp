#include "adce/rates.hpp"

#include <cmath>
#include <string>

#include "adce/error.hpp"
#include "adce/matrix_elements.hpp"

namespace adce {

namespace {

constexpr Complex kI{0.0, 1.0};

const DressedState& at(const DressedBasis& dressed, int m, std::size_t index) {
  const auto& sub = dressed.subspace(m);
  if (index >= sub.size()) {
    throw InvalidArgument("state index " + std::to_string(index) + " out of range in subspace m=" +
                          std::to_string(m));
  }
  return sub[index];
}

void require_neighbour(const DressedBasis& dressed, int m) {
  if (!dressed.has(m)) {
    throw InvalidArgument("subspace m=" + std::to_string(m) +
                          " is beyond the dressed cutoff; increase the number of subspaces");
  }
}

// Sum over tone components of Upsilon * exp(i sign * phi).
Complex weighted_upsilon(const DriveTone& tone, const DressedState& t, const DressedState& s, double sign) {
  Complex acc = 0.0;
  for (const auto& c : tone.components) acc += upsilon_coeff(c, t, s) * std::exp(kI * (sign * c.phase));
  return acc;
}

// G_{0,k} sum of Lambda, the amplitude entering nu and varsigma.
double coupled_lowering(const SystemParams& p, const DressedState& lower, const DressedState& upper, int k) {
  return p.coupling(k) * lowering_element(k, lower, upper);
}

std::string pair_name(int m1, const DressedState& a, int m2, const DressedState& b) {
  return "(" + std::to_string(m1) + "," + a.tag() + ") and (" + std::to_string(m2) + "," + b.tag() + ")";
}

}  // namespace

Complex ToneComponent::complex_depth() const { return depth * weight * std::exp(kI * phase); }

std::vector<DriveTone> drive_tones(const ModulationSpec& spec) {
  std::vector<DriveTone> out;
  for (Target target : kAllTargets) {
    const auto& mod = spec[target];
    if (!mod.active()) continue;
    for (const auto& tone : mod.tones) {
      ToneComponent c{target, mod.depth, tone.weight, tone.phase};
      bool merged = false;
      for (auto& existing : out) {
        if (std::abs(existing.frequency - tone.frequency) <= 1e-12 * tone.frequency) {
          existing.components.push_back(c);
          merged = true;
          break;
        }
      }
      if (!merged) out.push_back({tone.frequency, {c}});
    }
  }
  return out;
}

std::string_view to_string(ToneKind kind) {
  switch (kind) {
    case ToneKind::Fast: return "fast";
    case ToneKind::Slow: return "slow";
    case ToneKind::Inert: return "inert";
  }
  return "?";
}

ToneClass classify_tones(const std::vector<DriveTone>& tones, const DressedBasis& dressed, int m_lo, int m_hi) {
  std::vector<double> fast_gaps;
  std::vector<double> slow_gaps;
  for (int m = std::max(m_lo, 0); m <= m_hi && dressed.has(m); ++m) {
    const auto& here = dressed.subspace(m);
    for (std::size_t a = 0; a < here.size(); ++a) {
      for (std::size_t b = a + 1; b < here.size(); ++b) slow_gaps.push_back(std::abs(here[a].lambda - here[b].lambda));
    }
    if (!dressed.has(m + 2)) continue;
    for (const auto& t : here) {
      for (const auto& s : dressed.subspace(m + 2)) fast_gaps.push_back(std::abs(s.lambda - t.lambda));
    }
  }
  const double window = kToneWindow * dressed.params().omega0;
  auto near_any = [window](double eta, const std::vector<double>& gaps) {
    for (double g : gaps) {
      if (std::abs(eta - g) <= window) return true;
    }
    return false;
  };

  ToneClass out;
  for (std::size_t j = 0; j < tones.size(); ++j) {
    const double eta = tones[j].frequency;
    const bool fast = near_any(eta, fast_gaps);
    const bool slow = near_any(eta, slow_gaps);
    if (fast && slow) {
      throw InvalidArgument("tone " + std::to_string(j) + " (eta=" + std::to_string(eta) +
                            ") matches both fast and slow gap families");
    }
    if (fast) {
      out.kinds.push_back(ToneKind::Fast);
    } else if (slow) {
      out.kinds.push_back(ToneKind::Slow);
    } else {
      out.kinds.push_back(ToneKind::Inert);
      out.warnings.push_back("tone " + std::to_string(j) + " (eta=" + std::to_string(eta) +
                             ") matches no gap family and is ignored");
    }
  }
  return out;
}

double upsilon_coeff(char field, int k, double depth_weight, const DressedState& t, const DressedState& s) {
  if (k < 0 || k > 2) throw InvalidArgument("atomic index " + std::to_string(k) + " out of range");
  if (field == 'E') return depth_weight * projector_element(k, t, s);
  if (field == 'G') return depth_weight * coupling_element(k, t, s);
  throw InvalidArgument(std::string("unknown field '") + field + "' (expected E or G)");
}

double upsilon_coeff(const ToneComponent& c, const DressedState& t, const DressedState& s) {
  const double dw = c.depth * c.weight;
  switch (c.target) {
    case Target::E1: return upsilon_coeff('E', 1, dw, t, s);
    case Target::E2: return upsilon_coeff('E', 2, dw, t, s);
    case Target::G0: return upsilon_coeff('G', 0, dw, t, s);
    case Target::G1: return upsilon_coeff('G', 1, dw, t, s);
  }
  return 0.0;
}

double lambda_coeff(const DressedBasis& dressed, int k, int m_plus_2, std::size_t t, std::size_t s) {
  require_neighbour(dressed, m_plus_2);
  require_neighbour(dressed, m_plus_2 - 2);
  return lowering_element(k, at(dressed, m_plus_2 - 2, t), at(dressed, m_plus_2, s));
}

Complex sigma_rate(const DressedBasis& dressed, int m, std::size_t t, std::size_t s) {
  require_neighbour(dressed, m + 2);
  const SystemParams& p = dressed.params();
  const auto& st = at(dressed, m, t);
  const auto& ss = at(dressed, m, s);
  double sum = 0.0;
  for (int k = 0; k < 2; ++k) {
    for (int l = 0; l < 2; ++l) {
      for (const auto& r : dressed.subspace(m + 2)) {
        sum += coupled_lowering(p, st, r, k) * coupled_lowering(p, ss, r, l) / (r.lambda - ss.lambda);
      }
      if (m >= 2) {
        for (const auto& r : dressed.subspace(m - 2)) {
          sum -= coupled_lowering(p, r, st, k) * coupled_lowering(p, r, ss, l) / (ss.lambda - r.lambda);
        }
      }
    }
  }
  return kI * sum;
}

Complex xi_rate(const DriveTone& tone, ToneKind kind, const DressedBasis& dressed, int m, std::size_t t,
                std::size_t s) {
  if (kind != ToneKind::Slow) throw InvalidArgument("Xi is defined for slow tones only");
  const auto& st = at(dressed, m, t);
  const auto& ss = at(dressed, m, s);
  const double varpi = st.lambda_tilde >= ss.lambda_tilde ? 1.0 : -1.0;
  return 0.5 * varpi * weighted_upsilon(tone, st, ss, -varpi);
}

Complex theta_rate(const DriveTone& tone, ToneKind kind, const DressedBasis& dressed, int m_plus_2,
                   std::size_t t, std::size_t s) {
  if (kind != ToneKind::Fast) throw InvalidArgument("Theta is defined for fast tones only");
  require_neighbour(dressed, m_plus_2);
  const int m = m_plus_2 - 2;
  require_neighbour(dressed, m);
  const SystemParams& p = dressed.params();
  const auto& lower = at(dressed, m, t);
  const auto& upper = at(dressed, m_plus_2, s);
  const double eta = tone.frequency;

  auto check = [&](double denom, const DressedState& a, const DressedState& b) {
    if (std::abs(denom) < kDegenerateDenominator) {
      throw NumericalFailure("near-degenerate denominator in Theta between " +
                             pair_name(a.m, a, b.m, b) + "; the perturbative rate is invalid there");
    }
  };

  Complex total = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double gk = p.coupling(k);
    Complex term = 0.0;
    // Direct coupling modulation: -eps_{G,k}^{(j)} Lambda / G_{0,k}, multiplied by G_{0,k}/2 below.
    Complex direct = 0.0;
    const Target gtarget = k == 0 ? Target::G0 : Target::G1;
    for (const auto& c : tone.components) {
      if (c.target == gtarget) direct += c.complex_depth();
    }
    total += -0.5 * direct * lowering_element(k, lower, upper);
    if (gk == 0.0) continue;
    for (const auto& r : dressed.subspace(m_plus_2)) {
      const double denom = r.lambda - upper.lambda + eta;
      check(denom, r, upper);
      term += lowering_element(k, lower, r) * weighted_upsilon(tone, r, upper, +1.0) / denom;
    }
    for (const auto& r : dressed.subspace(m)) {
      const double denom = lower.lambda - r.lambda + eta;
      check(denom, lower, r);
      term -= lowering_element(k, r, upper) * weighted_upsilon(tone, lower, r, +1.0) / denom;
    }
    total += 0.5 * gk * term;
  }
  return total;
}

Resonance resonance_frequency(const DressedBasis& dressed, int m, std::size_t t, std::size_t s) {
  const auto& upper = at(dressed, m, t);
  const auto& lower = at(dressed, m - 2, s);
  return {upper.lambda_tilde - lower.lambda_tilde, upper.nu_boundary || lower.nu_boundary};
}

double thermal_weight(double nbar, int m) {
  if (nbar < 0.0) throw InvalidArgument("thermal mean photon number must be non-negative");
  if (m < 0) return 0.0;
  if (nbar == 0.0) return m == 0 ? 1.0 : 0.0;
  return std::exp(m * std::log(nbar) - (m + 1) * std::log1p(nbar));
}

double initial_population(const DressedBasis& dressed, double nbar, int m, std::size_t t) {
  const double c = at(dressed, m, t).coefficient(0);
  return thermal_weight(nbar, m) * c * c;
}

double population_difference(const DressedBasis& dressed, double nbar, int m, std::size_t t, std::size_t s) {
  return initial_population(dressed, nbar, m, t) - initial_population(dressed, nbar, m - 2, s);
}

RateTable build_rate_table(const ModulationSpec& spec, const DressedBasis& dressed, int m_lo, int m_hi) {
  const auto tones = drive_tones(spec);
  return build_rate_table(spec, dressed, m_lo, m_hi, classify_tones(tones, dressed, m_lo, m_hi));
}

RateTable build_rate_table(const ModulationSpec& spec, const DressedBasis& dressed, int m_lo, int m_hi,
                           const ToneClass& classes) {
  if (m_lo < 0 || m_hi < m_lo) throw InvalidArgument("invalid subspace range for rate table");
  require_neighbour(dressed, m_hi + 2);
  RateTable table;
  table.m_lo = m_lo;
  table.m_hi = m_hi;
  table.tones = drive_tones(spec);
  if (classes.kinds.size() != table.tones.size()) throw InvalidArgument("tone classification does not match the drive");
  table.classes = classes;

  for (int m = m_lo; m <= m_hi; ++m) {
    const std::size_t g = dressed.subspace(m).size();
    for (std::size_t t = 0; t < g; ++t) {
      for (std::size_t s = 0; s < g; ++s) {
        if (t == s) continue;
        table.sigma[{m, t, s}] = sigma_rate(dressed, m, t, s);
        for (std::size_t j = 0; j < table.tones.size(); ++j) {
          if (table.classes.kinds[j] == ToneKind::Slow) {
            table.xi[{j, m, t, s}] = xi_rate(table.tones[j], ToneKind::Slow, dressed, m, t, s);
          }
        }
      }
    }
    if (m - 2 < m_lo) continue;
    const std::size_t g_lower = dressed.subspace(m - 2).size();
    for (std::size_t t = 0; t < g; ++t) {
      for (std::size_t s = 0; s < g_lower; ++s) {
        table.resonances[{m, t, s}] = resonance_frequency(dressed, m, t, s);
      }
    }
    for (std::size_t j = 0; j < table.tones.size(); ++j) {
      if (table.classes.kinds[j] != ToneKind::Fast) continue;
      for (std::size_t t = 0; t < g_lower; ++t) {
        for (std::size_t s = 0; s < g; ++s) {
          table.theta[{j, m, t, s}] = theta_rate(table.tones[j], ToneKind::Fast, dressed, m, t, s);
        }
      }
    }
  }
  return table;
}

}  // namespace adce
