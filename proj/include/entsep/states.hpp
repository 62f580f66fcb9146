#pragma once

// Factories for the named state and operator families, separable
// decompositions used as structural certificates, and Haar / Hilbert-Schmidt
// sampling.

#include <entsep/matcore.hpp>
#include <entsep/random.hpp>
#include <entsep/upb.hpp>

#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace entsep {

// ---------------------------------------------------------------------------
// Fixed operators and vectors

/// Flip V: V (psi (x) phi) = phi (x) psi.
inline ComplexMatrix flipOperator(std::size_t d) {
  if (d < 2) throw InputError("flipOperator: d must be >= 2");
  const auto n = static_cast<Eigen::Index>(d * d);
  ComplexMatrix v = ComplexMatrix::Zero(n, n);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) v(static_cast<Eigen::Index>(j * d + i), static_cast<Eigen::Index>(i * d + j)) = 1.0;
  return v;
}

/// psi_+ = (1/sqrt d) sum_i |i>|i>.
inline ComplexVector maxEntangledVector(std::size_t d) {
  if (d < 2) throw InputError("maxEntangledVector: d must be >= 2");
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(d * d));
  const double amp = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t i = 0; i < d; ++i) v(static_cast<Eigen::Index>(i * d + i)) = amp;
  return v;
}

/// psi_- = (|01> - |10>)/sqrt 2.
inline ComplexVector singletVector() {
  ComplexVector v = ComplexVector::Zero(4);
  v(1) = std::numbers::sqrt2 / 2;
  v(2) = -std::numbers::sqrt2 / 2;
  return v;
}

inline ComplexMatrix symmetricProjector(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d * d);
  return (ComplexMatrix::Identity(n, n) + flipOperator(d)) * 0.5;
}

inline ComplexMatrix antisymmetricProjector(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d * d);
  return (ComplexMatrix::Identity(n, n) - flipOperator(d)) * 0.5;
}

inline ComplexMatrix pauli(int k) {
  ComplexMatrix s = ComplexMatrix::Zero(2, 2);
  switch (k) {
    case 0: s << 1, 0, 0, 1; break;
    case 1: s << 0, 1, 1, 0; break;
    case 2: s << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case 3: s << 1, 0, 0, -1; break;
    default: throw InputError("pauli: index must be 0..3");
  }
  return s;
}

inline DensityMatrix maximallyMixed(std::size_t dA, std::size_t dB) {
  const auto n = static_cast<Eigen::Index>(dA * dB);
  return DensityMatrix(ComplexMatrix::Identity(n, n) / static_cast<double>(n), dA, dB);
}

// ---------------------------------------------------------------------------
// Parametric families

inline DensityMatrix singletState() { return DensityMatrix(projector(singletVector()), 2, 2); }

inline DensityMatrix maxEntangledState(std::size_t d) { return DensityMatrix(projector(maxEntangledVector(d)), d, d); }

/// (I + beta V) / (d^2 + beta d), -1 <= beta <= 1.
inline DensityMatrix wernerState(std::size_t d, double beta) {
  if (d < 2) throw InputError("werner: d must be >= 2");
  if (!(beta >= -1.0 && beta <= 1.0)) throw InputError("werner: beta must lie in [-1, 1]");
  const auto n = static_cast<Eigen::Index>(d * d);
  const double dd = static_cast<double>(d);
  const ComplexMatrix m = ComplexMatrix::Identity(n, n) + beta * flipOperator(d);
  return DensityMatrix(m / (dd * dd + beta * dd), d, d);
}

/// beta of the Werner state p P_A/N_A + (1-p) I/d^2; for d = 2 this is
/// p |psi_-><psi_-| + (1-p) I/4.
inline double wernerBetaFromP(std::size_t d, double p) {
  const double dd = static_cast<double>(d);
  const double na = (dd * dd - dd) / 2.0;
  const double idCoeff = p / (2.0 * na) + (1.0 - p) / (dd * dd);
  return -p / (2.0 * na) / idCoeff;
}

inline DensityMatrix wernerStateP(std::size_t d, double p) {
  if (d < 2) throw InputError("werner: d must be >= 2");
  const double dd = static_cast<double>(d);
  const double lo = -(dd - 1.0) / (dd + 1.0);
  if (!(p >= lo - 1e-15 && p <= 1.0))
    throw InputError("werner: p must lie in [" + detail::sci(lo) + ", 1]");
  const double na = (dd * dd - dd) / 2.0;
  const auto n = static_cast<Eigen::Index>(d * d);
  const ComplexMatrix m =
      p / na * antisymmetricProjector(d) + (1.0 - p) / (dd * dd) * ComplexMatrix::Identity(n, n);
  return DensityMatrix(m, d, d);
}

/// rho(F, d) = d^2/(d^2-1) ((1-F) I/d^2 + (F - 1/d^2) P_+), 0 <= F <= 1.
inline DensityMatrix isotropicState(std::size_t d, double fraction) {
  if (d < 2) throw InputError("isotropic: d must be >= 2");
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw InputError("isotropic: F must lie in [0, 1]");
  const double d2 = static_cast<double>(d * d);
  const auto n = static_cast<Eigen::Index>(d * d);
  const ComplexMatrix m = d2 / (d2 - 1.0) *
                          ((1.0 - fraction) / d2 * ComplexMatrix::Identity(n, n) +
                           (fraction - 1.0 / d2) * projector(maxEntangledVector(d)));
  return DensityMatrix(m, d, d);
}

inline double isotropicFractionFromP(std::size_t d, double p) {
  const double d2 = static_cast<double>(d * d);
  return (p * (d2 - 1.0) + 1.0) / d2;
}

/// p P_+ + (1-p) I/d^2, -1/(d^2-1) <= p <= 1.
inline DensityMatrix isotropicStateP(std::size_t d, double p) {
  if (d < 2) throw InputError("isotropic: d must be >= 2");
  const double d2 = static_cast<double>(d * d);
  if (!(p >= -1.0 / (d2 - 1.0) - 1e-15 && p <= 1.0)) throw InputError("isotropic: p out of range");
  const auto n = static_cast<Eigen::Index>(d * d);
  const ComplexMatrix m = p * projector(maxEntangledVector(d)) + (1.0 - p) / d2 * ComplexMatrix::Identity(n, n);
  return DensityMatrix(m, d, d);
}

/// p |psi_-><psi_-| + (1-p) |00><00|.
inline DensityMatrix twoQubitExample(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("two-qubit-example: p must lie in [0, 1]");
  const ComplexMatrix m = p * projector(singletVector()) + (1.0 - p) * projector(basisKet({2, 2}, 0, 0));
  return DensityMatrix(m, 2, 2);
}

/// sigma_+ = (|01><01| + |12><12| + |20><20|)/3.
inline ComplexMatrix stormerSigmaPlus() {
  ComplexMatrix s = ComplexMatrix::Zero(9, 9);
  for (std::size_t i = 0; i < 3; ++i) s += projector(basisKet({3, 3}, i, (i + 1) % 3));
  return s / 3.0;
}

/// sigma_- = (|10><10| + |21><21| + |02><02|)/3.
inline ComplexMatrix stormerSigmaMinus() {
  ComplexMatrix s = ComplexMatrix::Zero(9, 9);
  for (std::size_t i = 0; i < 3; ++i) s += projector(basisKet({3, 3}, (i + 1) % 3, i));
  return s / 3.0;
}

/// sigma_alpha = (2/7) P_+ + (alpha/7) sigma_+ + ((5-alpha)/7) sigma_-, 2 <= alpha <= 5.
inline DensityMatrix stormerState(double alpha) {
  if (!(alpha >= 2.0 && alpha <= 5.0)) throw InputError("stormer: alpha must lie in [2, 5]");
  const ComplexMatrix m = 2.0 / 7.0 * projector(maxEntangledVector(3)) + alpha / 7.0 * stormerSigmaPlus() +
                          (5.0 - alpha) / 7.0 * stormerSigmaMinus();
  return DensityMatrix(m, 3, 3);
}

/// F P_+ + (1-F) sigma_+ on 3 (x) 3: the free entangled source pair of the activation protocol.
inline DensityMatrix activationSource(double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw InputError("activation source: F must lie in [0, 1]");
  const ComplexMatrix m = fraction * projector(maxEntangledVector(3)) + (1.0 - fraction) * stormerSigmaPlus();
  return DensityMatrix(m, 3, 3);
}

/// The 2 (x) 4 PPT entangled family rho_b, 0 < b < 1, in the product basis |ij>.
inline DensityMatrix rho2x4(double b) {
  if (!(b > 0.0 && b < 1.0)) throw InputError("rho2x4: b must lie in (0, 1)");
  ComplexMatrix m = ComplexMatrix::Zero(8, 8);
  for (int i = 0; i < 4; ++i) m(i, i) = b;
  m(5, 5) = m(6, 6) = b;
  m(0, 5) = m(5, 0) = b;
  m(1, 6) = m(6, 1) = b;
  m(2, 7) = m(7, 2) = b;
  m(4, 4) = m(7, 7) = (1.0 + b) / 2.0;
  m(4, 7) = m(7, 4) = std::sqrt(1.0 - b * b) / 2.0;
  return DensityMatrix(m / (7.0 * b + 1.0), 2, 4);
}

/// Normalized projector onto the span of a UPB (a separable mixture).
inline DensityMatrix upbSpanState(const Upb& upb) {
  return DensityMatrix(upbProjector(upb) / static_cast<double>(upb.size()), upb.dims().a, upb.dims().b);
}

// ---------------------------------------------------------------------------
// Separable decompositions

struct ProductTerm {
  double weight = 0.0;
  ComplexMatrix a;
  ComplexMatrix b;
};

/// Explicit convex mixture of product states; a separability certificate
/// once checked against the target state.
struct SeparableDecomposition {
  Dims dims;
  std::vector<ProductTerm> terms;

  ComplexMatrix reconstruct() const {
    const auto n = static_cast<Eigen::Index>(dims.total());
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    for (const auto& t : terms) m += t.weight * tensor(t.a, t.b);
    return m;
  }

  /// Weights nonnegative, factors states, and reconstruction within `tolerance` entrywise.
  bool certifies(const DensityMatrix& rho, double tolerance = 1e-10) const {
    if (!(dims == rho.dims())) return false;
    for (const auto& t : terms) {
      if (t.weight < 0.0) return false;
      if (std::abs(t.a.trace().real() - 1.0) > tol::trace || std::abs(t.b.trace().real() - 1.0) > tol::trace)
        return false;
      if (!isPositive(t.a) || !isPositive(t.b)) return false;
    }
    return detail::maxAbs(reconstruct() - rho.mat()) <= tolerance;
  }
};

/// (P_+ + sigma_+ + sigma_-)/3 as a uniform average of |psi(t)><psi(t)| (x)
/// |psi(-t)><psi(-t)| over the `points`-th roots of unity, with
/// psi(t) = (|0> + e^{it}|1> + e^{-2it}|2>)/sqrt 3. Exact for points >= 7.
inline SeparableDecomposition stormerRho1Decomposition(std::size_t points = 7) {
  SeparableDecomposition dec{{3, 3}, {}};
  for (std::size_t k = 0; k < points; ++k) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(points);
    auto psi = [](double th) {
      ComplexVector v(3);
      v << 1.0, std::polar(1.0, th), std::polar(1.0, -2.0 * th);
      return ComplexVector(v / std::sqrt(3.0));
    };
    dec.terms.push_back({1.0 / static_cast<double>(points), projector(psi(t)), projector(psi(-t))});
  }
  return dec;
}

/// sigma_alpha = (6/7) rho_1 + ((alpha-2)/7) sigma_+ + ((3-alpha)/7) sigma_-
/// for 2 <= alpha <= 3; nullopt outside that band.
inline std::optional<SeparableDecomposition> stormerSeparableDecomposition(double alpha) {
  if (!(alpha >= 2.0 && alpha <= 3.0)) return std::nullopt;
  SeparableDecomposition dec{{3, 3}, {}};
  for (auto t : stormerRho1Decomposition().terms) {
    t.weight *= 6.0 / 7.0;
    dec.terms.push_back(std::move(t));
  }
  auto basisProj = [](std::size_t i) {
    ComplexMatrix p = ComplexMatrix::Zero(3, 3);
    p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
    return p;
  };
  for (std::size_t i = 0; i < 3; ++i) {
    if (alpha > 2.0) dec.terms.push_back({(alpha - 2.0) / 21.0, basisProj(i), basisProj((i + 1) % 3)});
    if (alpha < 3.0) dec.terms.push_back({(3.0 - alpha) / 21.0, basisProj((i + 1) % 3), basisProj(i)});
  }
  return dec;
}

// ---------------------------------------------------------------------------
// Family specs

struct StateFamilySpec;

namespace family {
struct Singlet {};
struct MaxEntangled {
  std::size_t d = 2;
};
struct Werner {
  enum class Param { Beta, P };
  std::size_t d = 2;
  Param param = Param::Beta;
  double value = 0.0;
};
struct Isotropic {
  enum class Param { F, P };
  std::size_t d = 2;
  Param param = Param::F;
  double value = 0.0;
};
struct TwoQubitExample {
  double p = 0.0;
};
struct Stormer {
  double alpha = 2.0;
};
struct Rho2x4 {
  double b = 0.5;
};
struct TilesUpb {};
struct TilesBoundEntangled {};
/// (1 - epsilon) base + epsilon I/N.
struct MixedWithNoise {
  std::shared_ptr<const StateFamilySpec> base;
  double epsilon = 0.0;
};
struct Random {
  std::size_t dA = 2;
  std::size_t dB = 2;
  std::uint64_t seed = 0;
};
}  // namespace family

struct StateFamilySpec {
  using Variant = std::variant<family::Singlet, family::MaxEntangled, family::Werner, family::Isotropic,
                               family::TwoQubitExample, family::Stormer, family::Rho2x4, family::TilesUpb,
                               family::TilesBoundEntangled, family::MixedWithNoise, family::Random>;
  Variant family;
};

// ---------------------------------------------------------------------------
// Sampling

inline Complex complexGaussian(RngStream& rng) {
  const double re = rng.normal();
  const double im = rng.normal();
  return {re / std::numbers::sqrt2, im / std::numbers::sqrt2};
}

inline ComplexMatrix ginibre(std::size_t rows, std::size_t cols, RngStream& rng) {
  ComplexMatrix g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = complexGaussian(rng);
  return g;
}

/// Hilbert-Schmidt measure: G G^dagger / Tr(G G^dagger) with square Ginibre G.
inline DensityMatrix randomDensityMatrix(std::size_t dA, std::size_t dB, RngStream& rng) {
  if (dA < 1 || dB < 1) throw InputError("randomDensityMatrix: dimensions must be positive");
  const ComplexMatrix g = ginibre(dA * dB, dA * dB, rng);
  const ComplexMatrix m = g * g.adjoint();
  return DensityMatrix(m / m.trace().real(), dA, dB);
}

/// Haar unitary: QR of a Ginibre matrix with the phases of diag(R) moved into Q.
inline ComplexMatrix randomUnitary(std::size_t d, RngStream& rng) {
  if (d < 1) throw InputError("randomUnitary: d must be positive");
  const ComplexMatrix g = ginibre(d, d, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0.0) q.col(j) *= r(j, j) / mag;
  }
  return q;
}

/// Haar-random unit vector.
inline ComplexVector randomPureVector(std::size_t n, RngStream& rng) {
  ComplexVector v = ginibre(n, 1, rng).col(0);
  return v.normalized();
}

inline DensityMatrix randomProductPureState(std::size_t dA, std::size_t dB, RngStream& rng) {
  const ComplexVector a = randomPureVector(dA, rng);
  const ComplexVector b = randomPureVector(dB, rng);
  return DensityMatrix(projector(tensor(a, b)), dA, dB);
}

/// Random convex mixture of 1..maxTerms random pure product states.
inline DensityMatrix randomSeparableState(std::size_t dA, std::size_t dB, std::size_t maxTerms, RngStream& rng) {
  if (maxTerms == 0) throw InputError("randomSeparableState: maxTerms must be positive");
  const std::size_t terms = std::min(maxTerms, 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(maxTerms)));
  const auto n = static_cast<Eigen::Index>(dA * dB);
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  double total = 0.0;
  for (std::size_t t = 0; t < terms; ++t) {
    const double w = rng.uniform() + 1e-3;
    total += w;
    m += w * projector(tensor(randomPureVector(dA, rng), randomPureVector(dB, rng)));
  }
  return DensityMatrix(m / total, dA, dB);
}

/// Random PPT state on the PPT boundary: an HS-random state mixed with white
/// noise, (1-e) I/N + e rho, at the largest e keeping the partial transpose positive.
inline DensityMatrix randomPptBoundaryState(std::size_t dA, std::size_t dB, RngStream& rng) {
  const DensityMatrix base = randomDensityMatrix(dA, dB, rng);
  const double n = static_cast<double>(dA * dB);
  const double lam = minEigenvalue(partialTranspose(base));
  const double e = lam >= 0.0 ? 1.0 : (1.0 / n) / (1.0 / n - lam);
  const auto nn = static_cast<Eigen::Index>(dA * dB);
  const ComplexMatrix m = (1.0 - e) / n * ComplexMatrix::Identity(nn, nn) + e * base.mat();
  return DensityMatrix(m, dA, dB);
}

/// (U_A (x) U_B) rho (U_A (x) U_B)^dagger.
inline DensityMatrix applyLocalUnitaries(const DensityMatrix& rho, const ComplexMatrix& ua, const ComplexMatrix& ub) {
  return DensityMatrix(conjugate(rho.mat(), tensor(ua, ub)), rho.dimA(), rho.dimB());
}

// ---------------------------------------------------------------------------

inline DensityMatrix make(const StateFamilySpec& spec);

namespace detail {

struct MakeVisitor {
  DensityMatrix operator()(const family::Singlet&) const { return singletState(); }
  DensityMatrix operator()(const family::MaxEntangled& f) const { return maxEntangledState(f.d); }
  DensityMatrix operator()(const family::Werner& f) const {
    return f.param == family::Werner::Param::Beta ? wernerState(f.d, f.value) : wernerStateP(f.d, f.value);
  }
  DensityMatrix operator()(const family::Isotropic& f) const {
    return f.param == family::Isotropic::Param::F ? isotropicState(f.d, f.value) : isotropicStateP(f.d, f.value);
  }
  DensityMatrix operator()(const family::TwoQubitExample& f) const { return twoQubitExample(f.p); }
  DensityMatrix operator()(const family::Stormer& f) const { return stormerState(f.alpha); }
  DensityMatrix operator()(const family::Rho2x4& f) const { return rho2x4(f.b); }
  DensityMatrix operator()(const family::TilesUpb&) const { return upbSpanState(tilesUpb()); }
  DensityMatrix operator()(const family::TilesBoundEntangled&) const { return upbComplementState(tilesUpb()); }
  DensityMatrix operator()(const family::MixedWithNoise& f) const {
    if (!f.base) throw InputError("mixed-with-noise: missing base state");
    if (!(f.epsilon >= 0.0 && f.epsilon <= 1.0)) throw InputError("mixed-with-noise: epsilon must lie in [0, 1]");
    const DensityMatrix base = make(*f.base);
    const auto n = static_cast<Eigen::Index>(base.dim());
    const ComplexMatrix m =
        (1.0 - f.epsilon) * base.mat() + f.epsilon / static_cast<double>(n) * ComplexMatrix::Identity(n, n);
    return DensityMatrix(m, base.dimA(), base.dimB());
  }
  DensityMatrix operator()(const family::Random& f) const {
    if (f.dA < 2 || f.dB < 2) throw InputError("random: dimensions must be >= 2");
    RngStream rng(f.seed);
    return randomDensityMatrix(f.dA, f.dB, rng);
  }
};

}  // namespace detail

inline DensityMatrix make(const StateFamilySpec& spec) { return std::visit(detail::MakeVisitor{}, spec.family); }

}  // namespace entsep
