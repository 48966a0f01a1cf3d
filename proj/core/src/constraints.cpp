#include <algorithm>
#include <cmath>
#include <string>

#include "adce/dressed.hpp"
#include "adce/error.hpp"
#include "adce/matrix_elements.hpp"

namespace adce {

bool ConstraintReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const ConstraintCheck& c) { return c.pass; });
}

namespace {

void consider(ConstraintCheck& check, double value, const std::string& where) {
  if (value > check.worst) {
    check.worst = value;
    check.where = where;
  }
}

std::string pair_tag(int m, const DressedState& t, int m2, const DressedState& s) {
  return "(" + std::to_string(m) + "," + t.tag() + ")-(" + std::to_string(m2) + "," + s.tag() + ")";
}

// Largest modulation matrix element |Upsilon| between t and s over all targets and tones.
double max_upsilon(const ModulationSpec& spec, const DressedState& t, const DressedState& s) {
  double worst = 0.0;
  for (Target target : kAllTargets) {
    const auto& mod = spec[target];
    if (!mod.active()) continue;
    double element = 0.0;
    switch (target) {
      case Target::E1: element = projector_element(1, t, s); break;
      case Target::E2: element = projector_element(2, t, s); break;
      case Target::G0: element = coupling_element(0, t, s); break;
      case Target::G1: element = coupling_element(1, t, s); break;
    }
    for (const auto& tone : mod.tones) worst = std::max(worst, std::abs(mod.depth * tone.weight * element));
  }
  return worst;
}

}  // namespace

ConstraintReport validate_constraints(const SystemParams& params, const ModulationSpec& spec,
                                      const DressedBasis& dressed, int m_lo, int m_hi) {
  if (m_lo < 0 || m_hi < m_lo) throw InvalidArgument("invalid subspace range for constraint check");
  if (!dressed.has(m_hi + 2)) {
    throw InvalidArgument("constraint check needs dressed subspace m=" + std::to_string(m_hi + 2));
  }
  const double w0 = params.omega0;
  ConstraintCheck gap{"intra-subspace gap |lambda_T - lambda_S| / omega0", 0.0, kAtMost, "", true};
  ConstraintCheck upsilon{"|Upsilon| / omega0", 0.0, kMuchLessThan, "", true};
  ConstraintCheck mixing{"G_k G_l |Lambda| / (lambda_{m+2} - lambda_m) / omega0", 0.0, kMuchLessThan, "", true};
  ConstraintCheck strength{"G_k |Lambda| / omega0", 0.0, kAtMost, "", true};

  for (int m = m_lo; m <= m_hi; ++m) {
    const auto& here = dressed.subspace(m);
    for (const auto& t : here) {
      for (const auto& s : here) {
        consider(upsilon, max_upsilon(spec, t, s) / w0, pair_tag(m, t, m, s));
        if (&t == &s) continue;
        consider(gap, std::abs(t.lambda - s.lambda) / w0, pair_tag(m, t, m, s));
      }
    }
    for (const auto& s : here) {
      for (const auto& t : dressed.subspace(m + 2)) {
        const double denom = std::abs(t.lambda - s.lambda);
        for (int l = 0; l < 2; ++l) {
          const double lam = std::abs(lowering_element(l, s, t));
          consider(strength, params.coupling(l) * lam / w0, pair_tag(m, s, m + 2, t));
          for (int k = 0; k < 2; ++k) {
            const double v = params.coupling(k) * params.coupling(l) * lam;
            const double ratio = denom > 0.0 ? v / denom : (v > 0.0 ? HUGE_VAL : 0.0);
            consider(mixing, ratio / w0, pair_tag(m, s, m + 2, t));
          }
        }
      }
    }
  }

  ConstraintReport report;
  for (auto* c : {&gap, &upsilon, &mixing, &strength}) {
    c->pass = c->worst <= c->threshold;
    report.checks.push_back(*c);
  }
  return report;
}

}  // namespace adce
