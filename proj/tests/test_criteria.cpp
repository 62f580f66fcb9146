#include <entsep/criteria.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace entsep;

namespace {

DensityMatrix pureProduct(std::size_t dA, std::size_t dB, std::size_t i, std::size_t j) {
  return DensityMatrix(projector(basisKet({dA, dB}, i, j)), dA, dB);
}

bool hasMarginal(const Classification& c) {
  for (const auto& r : c.basis)
    if (r.verdict == Verdict::Marginal) return true;
  return false;
}

}  // namespace

TEST(Ppt, PaperExamples) {
  EXPECT_EQ(pptCheck(wernerStateP(2, 0.5)).verdict, Verdict::Violated);
  for (double b : {0.1, 0.3, 0.5, 0.7, 0.9}) EXPECT_EQ(pptCheck(rho2x4(b)).verdict, Verdict::Satisfied) << b;
  for (double p : {0.01, 0.5, 1.0}) EXPECT_EQ(pptCheck(twoQubitExample(p)).verdict, Verdict::Violated) << p;
}

TEST(Ppt, ViolationCarriesEvidence) {
  const CriterionReport r = pptCheck(singletState());
  EXPECT_NEAR(r.at("minEigenvalue"), -0.5, 1e-14);
  EXPECT_EQ(r.at("threshold"), 0.0);
}

TEST(Ppt, VerdictInvariantUnderProductUnitaries) {
  RngStream rng(1);
  for (int k = 0; k < 200; ++k) {
    const DensityMatrix rho = randomDensityMatrix(2, 3, rng);
    const DensityMatrix moved = applyLocalUnitaries(rho, randomUnitary(2, rng), randomUnitary(3, rng));
    EXPECT_EQ(pptCheck(rho).verdict, pptCheck(moved).verdict);
  }
}

TEST(Reduction, PaperExamples) {
  EXPECT_EQ(reductionCheck(isotropicState(3, 0.5)).verdict, Verdict::Violated);
  RngStream rng(2);
  for (int k = 0; k < 20; ++k) {
    const DensityMatrix a = randomDensityMatrix(3, 1, rng), b = randomDensityMatrix(2, 1, rng);
    EXPECT_EQ(reductionCheck(DensityMatrix(tensor(a.mat(), b.mat()), 3, 2)).verdict, Verdict::Satisfied);
  }
}

TEST(Reduction, EquivalentToPptInLowDimensions) {
  RngStream rng(3);
  for (auto [da, db] : {std::pair{2u, 2u}, std::pair{2u, 3u}})
    for (int k = 0; k < 1000; ++k) {
      const DensityMatrix rho = randomDensityMatrix(da, db, rng);
      ASSERT_EQ(reductionCheck(rho).verdict, pptCheck(rho).verdict) << da << "x" << db << " sample " << k;
    }
}

TEST(Entropic, PaperExamples) {
  EXPECT_EQ(entropicCheck(twoQubitExample(0.7), EntropyOrder::Two).verdict, Verdict::Violated);
  const CriterionReport mixed = entropicCheck(maximallyMixed(2, 2), EntropyOrder::One);
  EXPECT_EQ(mixed.verdict, Verdict::Satisfied);
  EXPECT_NEAR(mixed.at("S"), 2.0, 1e-12);
  EXPECT_NEAR(mixed.at("S_A"), 1.0, 1e-12);
}

TEST(Entropic, PureProductSitsOnTheBoundary) {
  for (auto o : {EntropyOrder::Zero, EntropyOrder::One, EntropyOrder::Two, EntropyOrder::Infinity}) {
    const CriterionReport r = entropicCheck(pureProduct(2, 2, 0, 1), o);
    EXPECT_NEAR(r.at("S"), 0.0, 1e-12);
    EXPECT_NEAR(r.at("S_A"), 0.0, 1e-12);
    EXPECT_EQ(r.verdict, Verdict::Marginal);
  }
}

TEST(Entropic, TwoQubitExampleThresholdsByOrder) {
  // spectra {p, 1-p} and {1-p/2, p/2}: for alpha in {1, 2, inf} S(rho) < S(rho_A) iff p > 2/3
  for (auto o : {EntropyOrder::One, EntropyOrder::Two, EntropyOrder::Infinity}) {
    for (double p : {0.3, 0.5, 0.6, 0.66})
      EXPECT_EQ(entropicCheck(twoQubitExample(p), o).verdict, Verdict::Satisfied) << p;
    for (double p : {0.67, 0.8, 1.0})
      EXPECT_EQ(entropicCheck(twoQubitExample(p), o).verdict, Verdict::Violated) << p;
  }
  const auto h2 = [](double p) { return -std::log2(p * p + (1 - p) * (1 - p)); };
  for (double p : {0.2, 0.6, 0.9}) {
    const CriterionReport r = entropicCheck(twoQubitExample(p), EntropyOrder::Two);
    EXPECT_NEAR(r.at("S"), h2(p), 1e-12);
    EXPECT_NEAR(r.at("S_A"), h2(p / 2), 1e-12);
  }
}

TEST(Entropic, RenyiValues) {
  const std::vector<double> ev{0.5, 0.25, 0.25, 0.0};
  EXPECT_NEAR(renyiEntropy(ev, EntropyOrder::Zero), std::log2(3.0), 1e-12);
  EXPECT_NEAR(renyiEntropy(ev, EntropyOrder::One), 1.5, 1e-12);
  EXPECT_NEAR(renyiEntropy(ev, EntropyOrder::Two), -std::log2(0.375), 1e-12);
  EXPECT_NEAR(renyiEntropy(ev, EntropyOrder::Infinity), 1.0, 1e-12);
}

TEST(Entropic, ImpliedByReduction) {
  RngStream rng(4);
  for (auto [da, db] : {std::pair{2u, 2u}, std::pair{2u, 3u}, std::pair{3u, 3u}})
    for (int k = 0; k < 300; ++k) {
      const DensityMatrix rho = randomDensityMatrix(da, db, rng);
      const bool reductionOk = reductionCheck(rho).verdict != Verdict::Violated;
      for (auto o : {EntropyOrder::Zero, EntropyOrder::One, EntropyOrder::Two, EntropyOrder::Infinity})
        if (reductionOk) ASSERT_NE(entropicCheck(rho, o).verdict, Verdict::Violated);
    }
}

TEST(Chsh, PaperExamples) {
  const CriterionReport s = chshM(singletState());
  EXPECT_NEAR(s.at("M"), 2.0, 1e-12);
  EXPECT_EQ(s.verdict, Verdict::Violated);
  EXPECT_EQ(chshM(twoQubitExample(0.7)).verdict, Verdict::Satisfied);
  const CriterionReport mixed = chshM(maximallyMixed(2, 2));
  EXPECT_NEAR(mixed.at("M"), 0.0, 1e-15);
  EXPECT_EQ(mixed.verdict, Verdict::Satisfied);
  EXPECT_EQ(chshM(stormerState(3.0)).verdict, Verdict::NotApplicable);
}

TEST(Chsh, SingletCorrelationMatrixIsMinusIdentity) {
  EXPECT_LT((correlationMatrix(singletState()) + RealMatrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Chsh, TwoQubitExampleThreshold) {
  // M = 2p^2 + (1-p)^2 ... evaluated in closed form: T = diag(-p, -p, 1-2p)
  for (double p : {0.3, 0.6, 0.7, 0.72, 0.9}) {
    std::vector<double> t2{p * p, p * p, (1 - 2 * p) * (1 - 2 * p)};
    std::sort(t2.rbegin(), t2.rend());
    EXPECT_NEAR(chshM(twoQubitExample(p)).at("M"), t2[0] + t2[1], 1e-12) << p;
  }
  EXPECT_EQ(chshM(twoQubitExample(0.72)).verdict, Verdict::Violated);
}

TEST(Chsh, NonNegativeOnSamples) {
  RngStream rng(5);
  for (int k = 0; k < 200; ++k) EXPECT_GE(chshM(randomDensityMatrix(2, 2, rng)).at("M"), 0.0);
}

TEST(SingletFraction, PaperExamples) {
  for (std::size_t d = 2; d <= 4; ++d) {
    EXPECT_NEAR(singletFraction(isotropicState(d, 0.37)), 0.37, 1e-14);
    EXPECT_NEAR(singletFraction(pureProduct(d, d, 0, 0)), 1.0 / double(d), 1e-15);
  }
  EXPECT_NEAR(singletFraction(singletState()), 0.0, 1e-15);
  EXPECT_THROW(singletFraction(rho2x4(0.5)), InputError);
}

TEST(FullyEntangledFraction, PaperExamples) {
  RngStream rng(6);
  EXPECT_NEAR(fullyEntangledFraction(maxEntangledState(3), 1, rng).value, 1.0, 1e-12);
  EXPECT_NEAR(fullyEntangledFraction(singletState(), 5, rng).value, 1.0, 1e-9);
  EXPECT_NEAR(fullyEntangledFraction(pureProduct(2, 2, 0, 0), 5, rng).value, 0.5, 1e-6);
}

TEST(FullyEntangledFraction, MatchesBruteForceGridOracle) {
  // max over U in SU(2) of <psi_+|(U (x) I) rho (U (x) I)^dagger|psi_+> on an Euler-angle grid
  RngStream rng(7);
  for (int k = 0; k < 5; ++k) {
    const DensityMatrix rho = randomDensityMatrix(2, 2, rng);
    const ComplexVector psi = maxEntangledVector(2);
    double grid = 0.0;
    const int n = 40;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b <= n; ++b)
        for (int c = 0; c < n; ++c) {
          const double phi = 2 * std::numbers::pi * a / n, theta = std::numbers::pi * b / n,
                       lam = 2 * std::numbers::pi * c / n;
          ComplexMatrix u(2, 2);
          u << std::cos(theta / 2), -std::polar(1.0, lam) * std::sin(theta / 2),
              std::polar(1.0, phi) * std::sin(theta / 2), std::polar(1.0, phi + lam) * std::cos(theta / 2);
          const ComplexMatrix full = tensor(u, ComplexMatrix(ComplexMatrix::Identity(2, 2)));
          grid = std::max(grid, psi.dot(full * rho.mat() * full.adjoint() * psi).real());
        }
    const double found = fullyEntangledFraction(rho, 10, rng).value;
    EXPECT_GE(found, grid - 1e-12);     // the optimizer beats the coarse grid
    EXPECT_LE(found, grid + 2e-2);      // and the grid resolution bounds the gap
  }
}

TEST(FullyEntangledFraction, BoundsAndMonotoneInBudget) {
  RngStream rng(8);
  for (int k = 0; k < 20; ++k) {
    const DensityMatrix rho = randomDensityMatrix(3, 3, rng);
    RngStream r1(100 + k), r2(100 + k);
    const double small = fullyEntangledFraction(rho, 1, r1).value;
    const double large = fullyEntangledFraction(rho, 4, r2).value;
    EXPECT_GE(small, singletFraction(rho) - 1e-12);
    EXPECT_GE(large, small - 1e-15);
    EXPECT_LE(large, 1.0 + 1e-12);
  }
}

TEST(FullyEntangledFraction, ReportsAchievingUnitary) {
  RngStream rng(9);
  const DensityMatrix rho = randomDensityMatrix(2, 2, rng);
  const FullyEntangledFractionResult r = fullyEntangledFraction(rho, 3, rng);
  const ComplexMatrix full = tensor(r.unitaryA, ComplexMatrix(ComplexMatrix::Identity(2, 2)));
  const ComplexVector psi = maxEntangledVector(2);
  // the reported state is (U (x) I)|psi_+>
  EXPECT_NEAR(psi.dot(full.adjoint() * rho.mat() * full * psi).real(), r.value, 1e-12);
  EXPECT_LT(detail::maxAbs(r.unitaryA.adjoint() * r.unitaryA - ComplexMatrix::Identity(2, 2)), 1e-10);
}

TEST(FullyEntangledFraction, CheckFlagsLargeFraction) {
  RngStream rng(10);
  EXPECT_EQ(fullyEntangledFractionCheck(isotropicState(3, 0.6), 2, rng).verdict, Verdict::Violated);
  EXPECT_EQ(fullyEntangledFractionCheck(maximallyMixed(3, 3), 2, rng).verdict, Verdict::Satisfied);
}

TEST(RankBound, PaperExamples) {
  ComplexVector psi(4);
  psi << 0.8, 0.0, 0.0, 0.6;
  EXPECT_EQ(rankBoundCheck(DensityMatrix(projector(psi), 2, 2)).verdict, Verdict::Violated);
  EXPECT_EQ(rankBoundCheck(maximallyMixed(3, 3)).verdict, Verdict::Satisfied);
  const CriterionReport upb = rankBoundCheck(upbComplementState(tilesUpb()));
  EXPECT_EQ(upb.verdict, Verdict::Satisfied);
  EXPECT_EQ(upb.at("rank"), 4.0);
  EXPECT_EQ(upb.at("rankA"), 3.0);
  EXPECT_EQ(upb.at("rankB"), 3.0);
}

TEST(Classify, PaperExamples) {
  const Classification s35 = classify(stormerState(3.5), hintsFor({family::Stormer{3.5}}));
  EXPECT_EQ(s35.label, EntanglementClass::PptEntangled);

  const DensityMatrix s45 = stormerState(4.5);
  EXPECT_EQ(pptCheck(s45).verdict, Verdict::Violated);
  EXPECT_EQ(classify(s45).label, EntanglementClass::NptEntangled);
  ClassificationHints h;
  h.projection = lowestTwoLevels(3, 3);
  EXPECT_EQ(classify(s45, h).label, EntanglementClass::FreeEntangled);

  const Classification w = classify(wernerStateP(3, 0.5));
  EXPECT_EQ(pptCheck(wernerStateP(3, 0.5)).verdict, Verdict::Violated);
  EXPECT_EQ(w.label, EntanglementClass::NptEntangled);
}

TEST(Classify, LowDimensionsFollowPpt) {
  RngStream rng(11);
  for (int k = 0; k < 300; ++k) {
    const DensityMatrix rho = randomDensityMatrix(2, 3, rng);
    const Classification c = classify(rho);
    if (pptCheck(rho).verdict == Verdict::Violated)
      EXPECT_EQ(c.label, EntanglementClass::FreeEntangled);
    else
      EXPECT_EQ(c.label, EntanglementClass::Separable);
  }
}

TEST(Classify, ReductionViolationProvesDistillability) {
  EXPECT_EQ(classify(isotropicState(3, 0.5)).label, EntanglementClass::FreeEntangled);
}

TEST(Classify, PptEntangledAlwaysHasAnIndependentProof) {
  for (double alpha : {3.2, 3.6, 4.0}) {
    const Classification c = classify(stormerState(alpha));
    ASSERT_EQ(c.label, EntanglementClass::PptEntangled);
    EXPECT_NE(pptCheck(stormerState(alpha)).verdict, Verdict::Violated);
    bool proof = false;
    for (const auto& r : c.basis)
      proof = proof || ((r.criterion == Criterion::ChoiMap || r.criterion == Criterion::UpbRange) &&
                        r.verdict == Verdict::Violated);
    EXPECT_TRUE(proof);
  }
}

TEST(Classify, Rho2x4IsNotProvablySeparable) {
  for (double b : {0.1, 0.5, 0.9}) EXPECT_EQ(classify(rho2x4(b)).label, EntanglementClass::Unknown);
}

TEST(Classify, StormerSweep) {
  const std::vector<std::pair<double, EntanglementClass>> grid = {
      {2.0, EntanglementClass::Separable},     {2.5, EntanglementClass::Separable},
      {3.0, EntanglementClass::Separable},     {3.5, EntanglementClass::PptEntangled},
      {4.0, EntanglementClass::PptEntangled},  {4.5, EntanglementClass::FreeEntangled},
      {5.0, EntanglementClass::FreeEntangled},
  };
  for (const auto& [alpha, label] : grid) {
    const Classification c = classify(stormerState(alpha), hintsFor({family::Stormer{alpha}}));
    EXPECT_EQ(c.label, label) << "alpha=" << alpha << ": " << c.reason;
    // alpha = 3 sits on the Choi-map threshold, alpha = 4 on the PPT boundary
    EXPECT_EQ(hasMarginal(c), alpha == 3.0) << "alpha=" << alpha;
    EXPECT_EQ(c.basis.front().detail == "PT has a kernel", alpha == 4.0) << "alpha=" << alpha;
  }
}

TEST(Battery, CoversAllCriteria) {
  RngStream rng(12);
  const auto two = criteriaBattery(singletState(), 2, rng);
  EXPECT_EQ(two.size(), 11u);
  EXPECT_EQ(two.back().verdict, Verdict::NotApplicable);  // Choi map needs 3x3
  const auto three = criteriaBattery(stormerState(3.5), 2, rng);
  EXPECT_EQ(three.back().verdict, Verdict::Violated);
  for (const auto& r : three)
    if (r.verdict == Verdict::Violated) EXPECT_TRUE(r.get("threshold").has_value()) << toString(r.criterion);
}
