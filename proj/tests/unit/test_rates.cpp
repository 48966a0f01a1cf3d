#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "adce/dressed.hpp"
#include "adce/error.hpp"
#include "adce/hilbert.hpp"
#include "adce/matrix_elements.hpp"
#include "adce/rates.hpp"

using namespace adce;

namespace {

constexpr double G = 0.06;
constexpr double kPi = std::numbers::pi;

SystemParams rr_params(double delta1 = -8 * G) { return SystemParams::from_detunings(G, 1.2 * G, delta1, -delta1); }
SystemParams qubit_params(double delta1 = -8 * G) { return SystemParams::from_detunings(G, 0.0, delta1, -delta1); }

DressedBasis corrected(const SystemParams& p, Regime regime, int m_max = 10) {
  return nu_corrections(dressed_numeric(p, m_max, regime));
}

DriveTone e1_tone(const SystemParams& p, double eta, double rel_depth = 0.05, double weight = 1.0,
                  double phase = 0.0) {
  return {eta, {{Target::E1, rel_depth * p.omega01(), weight, phase}}};
}

// Dense a sigma_{k,k+1} on the truncated basis.
Eigen::MatrixXd lowering_operator(const Basis& basis, int k) {
  Eigen::MatrixXd op = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const auto& s = basis[j];
    if (s.atom != k + 1 || s.photons == 0) continue;
    op(basis.index_of(k, s.photons - 1), j) = std::sqrt(double(s.photons));
  }
  return op;
}

Complex theta_for(const SystemParams& p, Regime regime, const DriveTone& tone, int m, Label upper, Label lower) {
  const auto d = corrected(p, regime);
  return theta_rate(tone, ToneKind::Fast, d, m, d.index_of(m - 2, lower), d.index_of(m, upper));
}

double resonance_for(const SystemParams& p, Regime regime, int m, Label upper, Label lower) {
  const auto d = corrected(p, regime);
  return resonance_frequency(d, m, d.index_of(m, upper), d.index_of(m - 2, lower)).eta;
}

}  // namespace

TEST(Upsilon, SecondCouplingTargetVanishes) {
  const auto d = corrected(rr_params(), Regime::DoubleResonant);
  for (const auto& t : d.subspace(4)) {
    for (const auto& s : d.subspace(4)) EXPECT_EQ(upsilon_coeff('G', 2, 0.01, t, s), 0.0);
  }
}

TEST(Upsilon, ResonantQubitHalfOccupation) {
  const auto p = qubit_params(0.0);
  const auto d = corrected(p, Regime::TwoLevel);
  const auto& plus = d.state(4, Label::PlusD);
  const double eps = 0.05 * p.omega01();
  EXPECT_NEAR(upsilon_coeff('E', 1, eps * 0.7, plus, plus), eps * 0.7 / 2, 1e-15);
}

TEST(Upsilon, Symmetric) {
  const auto d = corrected(rr_params(), Regime::DoubleResonant);
  const ToneComponent c{Target::G0, 0.003, 1.0, 0.0};
  for (const auto& t : d.subspace(4)) {
    for (const auto& s : d.subspace(4)) {
      EXPECT_DOUBLE_EQ(upsilon_coeff(c, t, s), upsilon_coeff(c, s, t));
      EXPECT_DOUBLE_EQ(upsilon_coeff('E', 2, 0.1, t, s), upsilon_coeff('E', 2, 0.1, s, t));
    }
  }
}

TEST(Lambda, ResonantQubit) {
  const auto d = corrected(qubit_params(0.0), Regime::TwoLevel);
  for (int m = 1; m <= 6; ++m) {
    const double v = lambda_coeff(d, 0, m + 2, d.index_of(m, Label::PlusD), d.index_of(m + 2, Label::PlusD));
    EXPECT_NEAR(v, std::sqrt(m + 1.0) / 2, 1e-13);
  }
}

TEST(Lambda, VanishesWithoutUpperLevelWeight) {
  // In the qubit case level 2 carries only the spectator, which has no weight on level 1.
  const auto d = corrected(qubit_params(), Regime::TwoLevel);
  const std::size_t two = d.index_of(6, Label::Two);
  for (std::size_t t = 0; t < d.subspace(4).size(); ++t) EXPECT_EQ(lambda_coeff(d, 0, 6, t, two), 0.0);
}

TEST(Lambda, MatchesDenseOperator) {
  const auto p = rr_params();
  const auto d = corrected(p, Regime::DoubleResonant);
  const Basis basis(12);
  for (int k = 0; k < 2; ++k) {
    const Eigen::MatrixXd op = lowering_operator(basis, k);
    for (int m = 0; m <= 6; ++m) {
      for (std::size_t t = 0; t < d.subspace(m).size(); ++t) {
        for (std::size_t s = 0; s < d.subspace(m + 2).size(); ++s) {
          const Eigen::VectorXd lo = d.embed(d.subspace(m)[t], basis).real();
          const Eigen::VectorXd hi = d.embed(d.subspace(m + 2)[s], basis).real();
          EXPECT_NEAR(lambda_coeff(d, k, m + 2, t, s), lo.dot(op * hi), 1e-12);
        }
      }
    }
  }
}

TEST(ClassifyTones, NearTwoPhotonGapIsFast) {
  const auto p = rr_params();
  const auto d = corrected(p, Regime::DoubleResonant);
  const auto c = classify_tones({e1_tone(p, 2.01)}, d, 0, 6);
  EXPECT_EQ(c.kinds[0], ToneKind::Fast);
}

TEST(ClassifyTones, IntraSubspaceGapIsSlow) {
  const auto p = rr_params();
  const auto d = corrected(p, Regime::DoubleResonant);
  EXPECT_NEAR(std::abs(d.state(4, Label::PlusD).lambda - d.state(4, Label::Zero).lambda), 0.9315 * G, 1e-4 * G);
  const auto c = classify_tones({e1_tone(p, 0.05)}, d, 2, 6);
  EXPECT_EQ(c.kinds[0], ToneKind::Slow);
}

TEST(ClassifyTones, NeitherFamilyIsInert) {
  const auto p = rr_params(0.0);
  const auto d = corrected(p, Regime::DoubleResonant);
  const auto c = classify_tones({e1_tone(p, 1.0)}, d, 0, 6);
  EXPECT_EQ(c.kinds[0], ToneKind::Inert);
  EXPECT_EQ(c.warnings.size(), 1u);
}

TEST(ClassifyTones, AmbiguousThrows) {
  // Strong coupling pushes intra-subspace gaps to within omega0/2 of the two-photon gaps.
  const auto p = SystemParams::from_detunings(0.3, 0.3, -0.1, 0.1);
  const auto d = corrected(p, Regime::Numeric);
  EXPECT_THROW(classify_tones({e1_tone(p, 1.5)}, d, 0, 6), InvalidArgument);
}

TEST(Sigma, ZeroWithoutCoupling) {
  const auto p = SystemParams::from_detunings(0.0, 0.0, -0.48, 0.3);
  const auto d = corrected(p, Regime::Numeric);
  for (int m = 0; m <= 6; ++m) {
    const std::size_t g = d.subspace(m).size();
    for (std::size_t t = 0; t < g; ++t) {
      for (std::size_t s = 0; s < g; ++s) {
        if (t != s) EXPECT_EQ(sigma_rate(d, m, t, s), Complex(0.0, 0.0));
      }
    }
  }
}

TEST(Sigma, PurelyImaginary) {
  const auto d = corrected(rr_params(), Regime::DoubleResonant);
  for (int m = 0; m <= 6; ++m) {
    const std::size_t g = d.subspace(m).size();
    for (std::size_t t = 0; t < g; ++t) {
      for (std::size_t s = 0; s < g; ++s) {
        if (t != s) EXPECT_EQ(sigma_rate(d, m, t, s).real(), 0.0);
      }
    }
  }
}

TEST(Sigma, CouplesBrightAndZeroStates) {
  const auto d = corrected(rr_params(), Regime::DoubleResonant);
  EXPECT_GT(std::abs(sigma_rate(d, 4, d.index_of(4, Label::PlusD), d.index_of(4, Label::Zero))), 0.0);
}

TEST(Sigma, BoundaryThrows) {
  const auto d = corrected(rr_params(), Regime::DoubleResonant, 6);
  EXPECT_THROW(sigma_rate(d, 5, 0, 1), InvalidArgument);
}

TEST(Xi, ZeroPhaseRealHalfSum) {
  const auto p = rr_params();
  const auto d = corrected(p, Regime::DoubleResonant);
  const DriveTone tone{0.05, {{Target::E1, 0.04, 0.6, 0.0}, {Target::E2, 0.03, 1.0, 0.0}}};
  const std::size_t t = d.index_of(4, Label::PlusD);
  const std::size_t s = d.index_of(4, Label::Zero);
  const auto xi = xi_rate(tone, ToneKind::Slow, d, 4, t, s);
  const auto& st = d.subspace(4)[t];
  const auto& ss = d.subspace(4)[s];
  const double sum = upsilon_coeff('E', 1, 0.04 * 0.6, st, ss) + upsilon_coeff('E', 2, 0.03, st, ss);
  EXPECT_EQ(xi.imag(), 0.0);
  EXPECT_NEAR(std::abs(xi), 0.5 * std::abs(sum), 1e-16);
}

TEST(Xi, SwapAntiConjugate) {
  const auto d = corrected(rr_params(), Regime::DoubleResonant);
  const DriveTone tone{0.05, {{Target::E1, 0.04, 0.6, 0.7}, {Target::G1, 0.002, 1.0, -0.4}}};
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t s = 0; s < 3; ++s) {
      if (t == s) continue;
      const auto a = xi_rate(tone, ToneKind::Slow, d, 4, t, s);
      const auto b = xi_rate(tone, ToneKind::Slow, d, 4, s, t);
      EXPECT_NEAR(std::abs(a + std::conj(b)), 0.0, 1e-16);
    }
  }
}

TEST(Xi, ZeroDepth) {
  const auto d = corrected(rr_params(), Regime::DoubleResonant);
  const DriveTone tone{0.05, {{Target::E1, 0.0, 1.0, 0.3}}};
  EXPECT_EQ(xi_rate(tone, ToneKind::Slow, d, 4, 0, 1), Complex(0.0, 0.0));
}

TEST(Xi, FastToneRejected) {
  const auto d = corrected(rr_params(), Regime::DoubleResonant);
  EXPECT_THROW(xi_rate(e1_tone(rr_params(), 2.0), ToneKind::Fast, d, 4, 0, 1), InvalidArgument);
}

TEST(Theta, ZeroDepth) {
  const auto p = rr_params();
  const DriveTone tone{1.44, {{Target::E1, 0.0, 1.0, 0.0}}};
  EXPECT_EQ(theta_for(p, Regime::DoubleResonant, tone, 4, Label::PlusD, Label::MinusD), Complex(0.0, 0.0));
}

TEST(Theta, DoubleResonantEnhancement) {
  for (Label upper : {Label::PlusD, Label::Zero}) {
    const auto rr = rr_params();
    const auto qb = qubit_params();
    const double eta_rr = resonance_for(rr, Regime::DoubleResonant, 4, upper, Label::MinusD);
    const double eta_qb = resonance_for(qb, Regime::TwoLevel, 4, Label::PlusD, Label::MinusD);
    const double t_rr = std::abs(theta_for(rr, Regime::DoubleResonant, e1_tone(rr, eta_rr), 4, upper, Label::MinusD));
    const double t_qb = std::abs(theta_for(qb, Regime::TwoLevel, e1_tone(qb, eta_qb), 4, Label::PlusD, Label::MinusD));
    EXPECT_GE(t_rr / t_qb, 10.0);
  }
}

TEST(Theta, JointModulationWithOppositePhaseIsFaster) {
  const auto p = rr_params();
  const double eta = resonance_for(p, Regime::DoubleResonant, 4, Label::PlusD, Label::MinusD);
  const DriveTone e1{eta, {{Target::E1, 0.05 * p.omega01(), 1.0, 0.0}}};
  const DriveTone both{eta, {{Target::E1, 0.05 * p.omega01(), 1.0, 0.0}, {Target::E2, 0.05 * p.omega12(), 1.0, kPi}}};
  EXPECT_GT(std::abs(theta_for(p, Regime::DoubleResonant, both, 4, Label::PlusD, Label::MinusD)),
            std::abs(theta_for(p, Regime::DoubleResonant, e1, 4, Label::PlusD, Label::MinusD)));
}

TEST(Theta, NearDegenerateDenominatorThrows) {
  // eta equal to an upper-subspace gap zeroes one R-sum denominator.
  const auto p = rr_params();
  const auto d = corrected(p, Regime::DoubleResonant);
  const double eta = d.state(4, Label::MinusD).lambda - d.state(4, Label::PlusD).lambda;
  EXPECT_THROW(theta_rate(e1_tone(p, eta), ToneKind::Fast, d, 4, d.index_of(2, Label::MinusD), d.index_of(4, Label::MinusD)),
               NumericalFailure);
}

TEST(Resonance, WithoutCorrectionsIsBareGap) {
  const auto d = dressed_numeric(rr_params(), 6, Regime::DoubleResonant);
  const std::size_t t = d.index_of(4, Label::PlusD);
  const std::size_t s = d.index_of(2, Label::MinusD);
  EXPECT_EQ(resonance_frequency(d, 4, t, s).eta, d.subspace(4)[t].lambda - d.subspace(2)[s].lambda);
}

TEST(Resonance, DispersiveFourPhotonProcess) {
  const auto p = SystemParams::from_detunings(G, 1.2 * G, -8 * G, -6 * G);
  const double eta = resonance_for(p, Regime::Dispersive, 4, Label::Zero, Label::Two);
  // Four-photon line up to the dispersive shifts of |0,4> (-G^2 4/8G) and |2,0> (+G01^2/6G).
  EXPECT_NEAR(eta, 4.0 - p.E0[2], G);
  EXPECT_NEAR(eta, 4.0 - p.E0[2] - 0.5 * G - 0.24 * G, 0.15 * G);
}

TEST(Resonance, BoundaryFlagged) {
  const auto d = corrected(rr_params(), Regime::DoubleResonant, 6);
  EXPECT_TRUE(resonance_frequency(d, 6, 0, 0).boundary);
  EXPECT_FALSE(resonance_frequency(d, 4, 0, 0).boundary);
}

TEST(Population, ThermalWeights) {
  EXPECT_NEAR(thermal_weight(1.5, 0), 0.4, 1e-15);
  EXPECT_NEAR(thermal_weight(1.5, 4), 0.05184, 1e-15);
}

TEST(Population, QubitInitialPopulation) {
  const auto d = corrected(qubit_params(), Regime::TwoLevel);
  EXPECT_NEAR(initial_population(d, 1.5, 4, d.index_of(4, Label::PlusD)), 0.05, 0.002);
}

TEST(Population, ResonantDifferencesNegative) {
  const auto d = corrected(rr_params(0.0), Regime::DoubleResonant);
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t s = 0; s < 3; ++s) EXPECT_LT(population_difference(d, 1.5, 4, t, s), 0.0);
  }
}

TEST(RateTable, CoversRangeAndKeys) {
  const auto p = rr_params();
  const auto d = corrected(p, Regime::DoubleResonant);
  ModulationSpec spec;
  spec[Target::E1].depth = 0.05 * p.omega01();
  spec[Target::E1].tones = {{resonance_for(p, Regime::DoubleResonant, 4, Label::PlusD, Label::MinusD), 1.0, 0.0}};
  const auto table = build_rate_table(spec, d, 2, 6);
  EXPECT_EQ(table.classes.kinds.front(), ToneKind::Fast);
  EXPECT_TRUE(table.xi.empty());
  EXPECT_EQ(table.sigma.size(), 5u * 6u);
  EXPECT_EQ(table.theta.size(), 3u * 9u);
  EXPECT_THROW(build_rate_table(spec, d, 2, 9), InvalidArgument);
}

// Invariants.
TEST(RateProperties, AnalyticAndNumericCoefficientsAgree) {
  for (Regime regime : {Regime::TwoLevel, Regime::DoubleResonant}) {
    const auto p = regime == Regime::TwoLevel ? qubit_params() : rr_params();
    const auto numeric = corrected(p, regime, 8);
    const auto analytic = nu_corrections(dressed_analytic(p, regime, 8));
    const double eta = 1.45;
    const DriveTone tone{eta, {{Target::E1, 0.05, 1.0, 0.0}, {Target::G0, 0.002, 1.0, 0.5}}};
    for (int m = 2; m <= 6; ++m) {
      for (const auto& up : analytic.subspace(m)) {
        for (const auto& lo : analytic.subspace(m - 2)) {
          const Complex a = theta_rate(tone, ToneKind::Fast, analytic, m, analytic.index_of(m - 2, *lo.label),
                                       analytic.index_of(m, *up.label));
          const Complex n = theta_rate(tone, ToneKind::Fast, numeric, m, numeric.index_of(m - 2, *lo.label),
                                       numeric.index_of(m, *up.label));
          EXPECT_LE(std::abs(a - n), 1e-9 * std::max(1.0, std::abs(n)));
          const double la = lambda_coeff(analytic, 0, m, analytic.index_of(m - 2, *lo.label), analytic.index_of(m, *up.label));
          const double ln = lambda_coeff(numeric, 0, m, numeric.index_of(m - 2, *lo.label), numeric.index_of(m, *up.label));
          EXPECT_NEAR(la, ln, 1e-9);
        }
      }
    }
  }
}

TEST(RateProperties, ThetaHomogeneousInDepth) {
  const auto p = rr_params();
  const auto d = corrected(p, Regime::DoubleResonant);
  const DriveTone tone{1.45, {{Target::E1, 0.05, 0.6, 0.0}, {Target::E2, 0.04, 1.0, kPi}, {Target::G1, 0.003, 1.0, 1.0}}};
  DriveTone doubled = tone;
  for (auto& c : doubled.components) c.depth *= 2;
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t s = 0; s < 3; ++s) {
      const double a = std::abs(theta_rate(tone, ToneKind::Fast, d, 4, t, s));
      const double b = std::abs(theta_rate(doubled, ToneKind::Fast, d, 4, t, s));
      EXPECT_NEAR(b, 2 * a, 1e-12 * b);
    }
  }
}

TEST(RateProperties, DoubleResonantPopulationsAboutHalfOfQubit) {
  const auto rr = corrected(rr_params(), Regime::DoubleResonant);
  const auto qb = corrected(qubit_params(), Regime::TwoLevel);
  const double ref = population_difference(qb, 1.5, 4, qb.index_of(4, Label::PlusD), qb.index_of(2, Label::MinusD));
  for (Label upper : {Label::PlusD, Label::Zero}) {
    const double v = population_difference(rr, 1.5, 4, rr.index_of(4, upper), rr.index_of(2, Label::MinusD));
    EXPECT_GE(v / ref, 0.35);
    EXPECT_LE(v / ref, 0.65);
  }
}

TEST(RateProperties, PopulationDifferenceGrowsWithDetuning) {
  struct Candidate {
    Regime regime;
    Label upper, lower;
  };
  const Candidate candidates[] = {{Regime::DoubleResonant, Label::PlusD, Label::MinusD},
                                  {Regime::DoubleResonant, Label::Zero, Label::MinusD},
                                  {Regime::TwoLevel, Label::PlusD, Label::MinusD}};
  for (const auto& c : candidates) {
    double previous = -1.0;
    for (double x = 4.0; x <= 10.0 + 1e-9; x += 0.25) {
      const auto p = c.regime == Regime::TwoLevel ? qubit_params(-x * G) : rr_params(-x * G);
      const auto d = corrected(p, c.regime, 6);
      const double v = population_difference(d, 1.5, 4, d.index_of(4, c.upper), d.index_of(2, c.lower));
      EXPECT_GT(v, previous) << "x=" << x;
      previous = v;
    }
  }
}
