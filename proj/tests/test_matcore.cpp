#include <entsep/matcore.hpp>
#include <entsep/states.hpp>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

using namespace entsep;

namespace {

ComplexMatrix sigmaX() { return pauli(1); }

ComplexMatrix randomHermitian(std::size_t n, RngStream& rng) {
  const ComplexMatrix g = ginibre(n, n, rng);
  return (g + g.adjoint()) * 0.5;
}

}  // namespace

TEST(Tensor, IdentityTimesIdentity) {
  const ComplexMatrix i2 = ComplexMatrix::Identity(2, 2);
  EXPECT_EQ(tensor(i2, i2), ComplexMatrix::Identity(4, 4));
}

TEST(Tensor, BasisProductHasSingleEntry) {
  ComplexMatrix p0 = ComplexMatrix::Zero(2, 2), p1 = ComplexMatrix::Zero(2, 2);
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  const ComplexMatrix t = tensor(p0, p1);
  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  expected(1, 1) = 1.0;
  EXPECT_EQ(t, expected);
}

TEST(Tensor, SigmaXSigmaXFlipsBothBits) {
  const ComplexVector out = tensor(sigmaX(), sigmaX()) * basisKet({2, 2}, 0, 0);
  EXPECT_LT((out - basisKet({2, 2}, 1, 1)).norm(), 1e-15);
}

TEST(Tensor, Associative) {
  RngStream rng(3);
  const ComplexMatrix a = ginibre(2, 2, rng), b = ginibre(3, 3, rng), c = ginibre(2, 2, rng);
  EXPECT_LE(detail::maxAbs(tensor(tensor(a, b), c) - tensor(a, tensor(b, c))), 1e-14);
}

TEST(PartialTrace, MaxEntangledReducesToMaximallyMixed) {
  const DensityMatrix r = partialTrace(maxEntangledState(2), Subsystem::B);
  EXPECT_LT(detail::maxAbs(r.mat() - ComplexMatrix::Identity(2, 2) / 2.0), 1e-15);
}

TEST(PartialTrace, SingletOverAIsMaximallyMixed) {
  const DensityMatrix r = partialTrace(singletState(), Subsystem::A);
  EXPECT_LT(detail::maxAbs(r.mat() - ComplexMatrix::Identity(2, 2) / 2.0), 1e-15);
}

TEST(PartialTrace, ProductFactorizes) {
  RngStream rng(5);
  for (int k = 0; k < 20; ++k) {
    const DensityMatrix r1 = randomDensityMatrix(2, 1, rng);
    const DensityMatrix r2 = randomDensityMatrix(3, 1, rng);
    const DensityMatrix a(r1.mat(), 2, 1), b(r2.mat(), 3, 1);
    const ComplexMatrix joint = tensor(a.mat(), b.mat());
    EXPECT_LT(detail::maxAbs(partialTrace(joint, {2, 3}, Subsystem::B) - a.mat()), tol::trace);
    EXPECT_LT(detail::maxAbs(partialTrace(joint, {2, 3}, Subsystem::A) - b.mat()), tol::trace);
  }
}

TEST(PartialTrace, DimensionMismatchThrows) {
  EXPECT_THROW(partialTrace(ComplexMatrix::Identity(5, 5), {2, 2}, Subsystem::A), InputError);
}

TEST(PartialTranspose, ProductTransposesSecondFactor) {
  RngStream rng(7);
  const ComplexMatrix a = randomDensityMatrix(2, 1, rng).mat();
  const ComplexMatrix b = randomDensityMatrix(3, 1, rng).mat();
  const ComplexMatrix pt = partialTranspose(tensor(a, b), {2, 3});
  EXPECT_LT(detail::maxAbs(pt - tensor(a, ComplexMatrix(b.transpose()))), 1e-15);
  EXPECT_TRUE(isPositive(pt));
}

TEST(PartialTranspose, MaxEntangledGivesFlipOverD) {
  for (std::size_t d = 2; d <= 4; ++d) {
    const ComplexMatrix pt = partialTranspose(maxEntangledState(d));
    EXPECT_LT(detail::maxAbs(pt - flipOperator(d) / static_cast<double>(d)), 1e-15) << "d=" << d;
  }
}

TEST(PartialTranspose, SingletMinimumEigenvalue) {
  EXPECT_NEAR(minEigenvalue(partialTranspose(singletState())), -0.5, 1e-14);
  EXPECT_FALSE(isPositive(partialTranspose(singletState())));
}

TEST(PartialTranspose, InvolutionAndTrace) {
  RngStream rng(11);
  for (int k = 0; k < 50; ++k) {
    const DensityMatrix rho = randomDensityMatrix(2, 3, rng);
    const ComplexMatrix pt = partialTranspose(rho);
    EXPECT_EQ(partialTranspose(pt, rho.dims()), rho.mat());
    EXPECT_EQ(partialTranspose(partialTranspose(rho.mat(), rho.dims(), Subsystem::A), rho.dims(), Subsystem::A),
              rho.mat());
    EXPECT_NEAR(pt.trace().real(), 1.0, tol::trace);
  }
}

TEST(PartialTranspose, SpectrumInvariantUnderRealOrthogonalOnB) {
  RngStream rng(13);
  for (int k = 0; k < 20; ++k) {
    const DensityMatrix rho = randomDensityMatrix(3, 3, rng);
    const ComplexMatrix ua = randomUnitary(3, rng);
    const RealMatrix gb = RealMatrix::Random(3, 3);
    const Eigen::HouseholderQR<RealMatrix> qr(gb);
    const ComplexMatrix ob = RealMatrix(qr.householderQ()).cast<Complex>();
    const ComplexMatrix rotated = conjugate(rho.mat(), tensor(ua, ob));
    const auto s1 = hermitianEig(partialTranspose(rho)).eigenvalues;
    const auto s2 = hermitianEig(partialTranspose(rotated, rho.dims())).eigenvalues;
    for (std::size_t i = 0; i < s1.size(); ++i) EXPECT_NEAR(s1[i], s2[i], 1e-12);
  }
}

TEST(PartialTranspose, PositivityVerdictInvariantUnderProductUnitaries) {
  RngStream rng(17);
  for (int k = 0; k < 50; ++k) {
    const DensityMatrix rho = randomDensityMatrix(2, 2, rng);
    const ComplexMatrix u = tensor(randomUnitary(2, rng), randomUnitary(2, rng));
    EXPECT_EQ(isPositive(partialTranspose(rho)), isPositive(partialTranspose(conjugate(rho.mat(), u), rho.dims())));
  }
}

TEST(HermitianEig, Identity) {
  const Spectrum s = hermitianEig(ComplexMatrix::Identity(4, 4));
  for (double v : s.eigenvalues) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(HermitianEig, FlipOperatorSpectrum) {
  const Spectrum s = hermitianEig(flipOperator(2));
  ASSERT_EQ(s.eigenvalues.size(), 4u);
  EXPECT_NEAR(s.eigenvalues[0], 1.0, 1e-15);
  EXPECT_NEAR(s.eigenvalues[2], 1.0, 1e-15);
  EXPECT_NEAR(s.eigenvalues[3], -1.0, 1e-15);
}

TEST(HermitianEig, DiagonalSortedDescending) {
  ComplexMatrix m = ComplexMatrix::Zero(3, 3);
  m(0, 0) = 3.0;
  m(1, 1) = 1.0;
  m(2, 2) = 2.0;
  const Spectrum s = hermitianEig(m);
  EXPECT_EQ(s.eigenvalues, (std::vector<double>{3.0, 2.0, 1.0}));
}

TEST(HermitianEig, RejectsNonHermitian) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  EXPECT_THROW(hermitianEig(m), InputError);
}

TEST(HermitianEig, MatchesEigenSolverAndReconstructs) {
  RngStream rng(19);
  for (std::size_t n : {2u, 4u, 9u, 16u, 81u}) {
    const ComplexMatrix m = randomHermitian(n, rng);
    const Spectrum s = hermitianEig(m);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> oracle(m);
    const double scale = detail::maxAbs(m);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(s.eigenvalues[i], oracle.eigenvalues()(static_cast<Eigen::Index>(n - 1 - i)), 1e-11 * scale);
      const ComplexVector v = s.vector(i);
      EXPECT_LE((m * v - s.eigenvalues[i] * v).norm(), 10 * tol::eig * m.norm()) << "n=" << n;
    }
    ComplexMatrix rebuilt = ComplexMatrix::Zero(m.rows(), m.cols());
    for (std::size_t i = 0; i < n; ++i) rebuilt += s.eigenvalues[i] * projector(s.vector(i));
    EXPECT_LE(detail::maxAbs(rebuilt - m), 10 * tol::eig * scale) << "n=" << n;
    EXPECT_TRUE(std::is_sorted(s.eigenvalues.rbegin(), s.eigenvalues.rend()));
  }
}

TEST(HermitianEig, DegenerateSpectrum) {
  const Spectrum s = hermitianEig(symmetricProjector(3));
  EXPECT_NEAR(s.eigenvalues[0], 1.0, 1e-14);
  EXPECT_NEAR(s.eigenvalues[5], 1.0, 1e-14);
  EXPECT_NEAR(s.eigenvalues[6], 0.0, 1e-14);
}

TEST(IsPositive, Cases) {
  EXPECT_TRUE(isPositive(ComplexMatrix::Identity(4, 4) / 4.0));
  EXPECT_TRUE(isPositive(ComplexMatrix::Zero(3, 3)));
  EXPECT_FALSE(isPositive(partialTranspose(singletState())));
}

TEST(IsPositive, TriState) {
  EXPECT_EQ(positivityOf(0.1), Positivity::Positive);
  EXPECT_EQ(positivityOf(-0.5e-9), Positivity::Marginal);
  EXPECT_EQ(positivityOf(0.5e-9), Positivity::Marginal);
  EXPECT_EQ(positivityOf(-2e-9), Positivity::Negative);
}

TEST(DensityMatrix, RejectsTraceDeviation) {
  const ComplexMatrix m = ComplexMatrix::Identity(4, 4) * 0.9 / 4.0;
  try {
    DensityMatrix rho(m, 2, 2);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("trace deviation 1.0e-01 > tau_trace"), std::string::npos) << e.what();
  }
}

TEST(DensityMatrix, RejectsNegativeAndNonHermitian) {
  ComplexMatrix neg = ComplexMatrix::Zero(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  EXPECT_THROW(DensityMatrix(neg, 2, 1), InputError);
  ComplexMatrix nh = ComplexMatrix::Identity(2, 2) / 2.0;
  nh(0, 1) = 1e-6;
  EXPECT_THROW(DensityMatrix(nh, 2, 1), InputError);
  EXPECT_THROW(DensityMatrix(ComplexMatrix::Identity(4, 4) / 4.0, 3, 1), InputError);
}

TEST(DensityMatrix, RejectsNonFinite) {
  ComplexMatrix m = ComplexMatrix::Identity(2, 2) / 2.0;
  m(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(DensityMatrix(m, 2, 1), InputError);
}

TEST(DensityMatrix, SymmetrizesSmallDrift) {
  ComplexMatrix m = ComplexMatrix::Identity(2, 2) / 2.0;
  m(0, 1) = 1e-12;
  const DensityMatrix rho(m, 2, 1);
  EXPECT_EQ(rho.mat(), rho.mat().adjoint());
}

TEST(Fidelity, Cases) {
  EXPECT_NEAR(fidelityWith(maxEntangledState(3), maxEntangledVector(3)), 1.0, 1e-15);
  for (std::size_t d = 2; d <= 4; ++d)
    EXPECT_NEAR(fidelityWith(maximallyMixed(d, d), maxEntangledVector(d)), 1.0 / double(d * d), 1e-15);
  EXPECT_NEAR(fidelityWith(isotropicState(3, 0.42), maxEntangledVector(3)), 0.42, 1e-14);
}

TEST(Fidelity, RejectsBadVectors) {
  EXPECT_THROW(fidelityWith(singletState(), maxEntangledVector(3)), InputError);
  EXPECT_THROW(fidelityWith(singletState(), ComplexVector(2 * maxEntangledVector(2))), InputError);
}
