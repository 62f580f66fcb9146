#pragma once

// Operator-level simulation of distillation protocols: twirling, BBPSSW
// recurrence, filtering, reduction-based distillation, activation of bound
// entanglement, and teleportation fidelity accounting.

#include <entsep/criteria.hpp>
#include <entsep/matcore.hpp>
#include <entsep/random.hpp>
#include <entsep/states.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace entsep {

enum class Protocol { Bbpssw, Filtering, Activation, IsotropicReduce, ReductionFilter };

inline const char* toString(Protocol p) {
  switch (p) {
    case Protocol::Bbpssw: return "bbpssw";
    case Protocol::Filtering: return "filtering";
    case Protocol::Activation: return "activation";
    case Protocol::IsotropicReduce: return "isotropic-reduce";
    case Protocol::ReductionFilter: return "reduction-filter";
  }
  return "?";
}

struct TraceStep {
  std::size_t iteration = 0;
  double fidelity = 0.0;
  double successProb = 1.0;
  double cumulativeYieldFactor = 1.0;
};

/// Per-iteration record of a protocol run; step 0 is the input.
struct ProtocolTrace {
  Protocol protocol = Protocol::Bbpssw;
  std::vector<std::pair<std::string, double>> params;
  std::vector<TraceStep> steps;

  std::size_t iterations() const { return steps.empty() ? 0 : steps.size() - 1; }
  double finalFidelity() const { return steps.back().fidelity; }
};

struct StepResult {
  double fidelity = 0.0;
  double successProb = 0.0;
};

// ---------------------------------------------------------------------------
// Twirling

/// U (x) U twirl in closed form: the Werner state a I + b V with the same
/// trace and the same Tr(V rho).
inline DensityMatrix twirlUU(const DensityMatrix& rho) {
  detail::requireSquareBipartition(rho, "twirlUU");
  const std::size_t d = rho.dimA();
  const double dd = static_cast<double>(d);
  const ComplexMatrix v = flipOperator(d);
  const double t = expectation(v, rho.mat());
  const double det = dd * dd * dd * dd - dd * dd;
  const double a = (dd * dd - dd * t) / det;
  const double b = (dd * dd * t - dd) / det;
  const auto n = static_cast<Eigen::Index>(d * d);
  return DensityMatrix(a * ComplexMatrix::Identity(n, n) + b * v, d, d);
}

/// U (x) U* twirl in closed form: the isotropic state with the same singlet fraction.
inline DensityMatrix twirlUUstar(const DensityMatrix& rho) {
  detail::requireSquareBipartition(rho, "twirlUUstar");
  return isotropicState(rho.dimA(), singletFraction(rho));
}

/// Monte Carlo average of (U (x) U') rho (U (x) U')^dagger over Haar U, with
/// U' = U or conj(U).
inline ComplexMatrix twirlMonteCarlo(const DensityMatrix& rho, std::size_t samples, RngStream& rng, bool conjugateB) {
  detail::requireSquareBipartition(rho, "twirlMonteCarlo");
  const auto n = static_cast<Eigen::Index>(rho.dim());
  ComplexMatrix acc = ComplexMatrix::Zero(n, n);
  for (std::size_t k = 0; k < samples; ++k) {
    const ComplexMatrix u = randomUnitary(rho.dimA(), rng);
    const ComplexMatrix ub = conjugateB ? ComplexMatrix(u.conjugate()) : u;
    acc += conjugate(rho.mat(), tensor(u, ub));
  }
  return acc / static_cast<double>(std::max<std::size_t>(samples, 1));
}

// ---------------------------------------------------------------------------
// Bilateral XOR rounds

struct XorRound {
  /// Kept source pair, normalized.
  DensityMatrix source;
  /// Probability that the target measurements agree.
  double successProb = 0.0;
};

/// One recurrence round on source (x) target pairs of d (x) d systems.
///
/// Builds the explicit d^4 x d^4 state, applies U_XOR|a>|b> = |a>|b+a mod d>
/// on each side with the source member as control, projects the target pair
/// onto agreeing computational-basis outcomes sum_a |aa><aa|, and traces the
/// target pair out.
inline XorRound bilateralXorRound(const DensityMatrix& source, const DensityMatrix& target) {
  detail::requireSquareBipartition(source, "bilateralXorRound");
  if (!(source.dims() == target.dims())) throw InputError("bilateralXorRound: source and target dims differ");
  const std::size_t d = source.dimA();
  const std::size_t d2 = d * d;
  const std::size_t full = d2 * d2;
  // Index layout: ((sA*d + sB)*d + tA)*d + tB.
  auto index = [d](std::size_t sA, std::size_t sB, std::size_t tA, std::size_t tB) {
    return static_cast<Eigen::Index>(((sA * d + sB) * d + tA) * d + tB);
  };
  ComplexMatrix xorOp = ComplexMatrix::Zero(static_cast<Eigen::Index>(full), static_cast<Eigen::Index>(full));
  for (std::size_t sA = 0; sA < d; ++sA)
    for (std::size_t sB = 0; sB < d; ++sB)
      for (std::size_t tA = 0; tA < d; ++tA)
        for (std::size_t tB = 0; tB < d; ++tB)
          xorOp(index(sA, sB, (tA + sA) % d, (tB + sB) % d), index(sA, sB, tA, tB)) = 1.0;

  const ComplexMatrix joint = conjugate(tensor(source.mat(), target.mat()), xorOp);

  ComplexMatrix kept = ComplexMatrix::Zero(static_cast<Eigen::Index>(d2), static_cast<Eigen::Index>(d2));
  for (std::size_t s = 0; s < d2; ++s)
    for (std::size_t sp = 0; sp < d2; ++sp)
      for (std::size_t a = 0; a < d; ++a)
        kept(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(sp)) +=
            joint(index(s / d, s % d, a, a), index(sp / d, sp % d, a, a));
  const double p = kept.trace().real();
  if (p < 1e-15) throw NumericalError("bilateralXorRound: success probability vanishes");
  return {DensityMatrix::normalized(kept, d, d), p};
}

// ---------------------------------------------------------------------------
// BBPSSW

/// F' = (F^2 + (1-F)^2/9) / (F^2 + 2F(1-F)/3 + 5(1-F)^2/9); the denominator
/// is the probability that the target outcomes agree.
inline StepResult bbpsswStep(double f) {
  if (!(f >= 0.0 && f <= 1.0)) throw InputError("bbpsswStep: F must lie in [0, 1]");
  const double g = 1.0 - f;
  const double num = f * f + g * g / 9.0;
  const double den = f * f + 2.0 / 3.0 * f * g + 5.0 / 9.0 * g * g;
  return {num / den, den};
}

/// The same round simulated on two explicit isotropic two-qubit pairs.
inline StepResult bbpsswSimulate(double f) {
  if (!(f >= 0.0 && f <= 1.0)) throw InputError("bbpsswSimulate: F must lie in [0, 1]");
  const DensityMatrix pair = isotropicState(2, f);
  const XorRound r = bilateralXorRound(pair, pair);
  return {fidelityWith(r.source, maxEntangledVector(2)), r.successProb};
}

/// Iterate bbpsswStep from fIn until F >= fTarget. Each round consumes two
/// pairs for one, so the yield factor is prod_i p_i / 2^l.
inline ProtocolTrace bbpsswRun(double fIn, double fTarget, std::size_t maxIterations = 200) {
  if (!(fIn > 0.5)) throw PreconditionError("bbpsswRun: F_in must exceed 1/2");
  if (!(fTarget > fIn && fTarget <= 1.0 - 1e-12))
    throw InputError("bbpsswRun: need F_in < F_target <= 1 - 1e-12");
  ProtocolTrace trace{Protocol::Bbpssw, {{"F_in", fIn}, {"F_target", fTarget}}, {{0, fIn, 1.0, 1.0}}};
  double f = fIn;
  double yield = 1.0;
  for (std::size_t l = 1; f < fTarget; ++l) {
    if (l > maxIterations) throw NumericalError("bbpsswRun: iteration cap reached before F_target");
    const StepResult s = bbpsswStep(f);
    f = s.fidelity;
    yield *= s.successProb / 2.0;
    trace.steps.push_back({l, f, s.successProb, yield});
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Filtering

struct FilterResult {
  /// Local filter W, rescaled so that its operator norm is 1.
  ComplexMatrix filter;
  Subsystem side = Subsystem::A;
  DensityMatrix outputState;
  double successProb = 0.0;
};

/// A_phi with phi = (A_phi (x) I) psi_+, i.e. <i|A|j> = sqrt(d) phi_ij.
inline ComplexMatrix vectorToOperator(const ComplexVector& phi, std::size_t d) {
  if (static_cast<std::size_t>(phi.size()) != d * d) throw InputError("vectorToOperator: length must be d^2");
  ComplexMatrix a(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  const double s = std::sqrt(static_cast<double>(d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s * phi(static_cast<Eigen::Index>(i * d + j));
  return a;
}

inline double operatorNorm(const ComplexMatrix& w) {
  return std::sqrt(std::max(0.0, hermitianEig(w.adjoint() * w).max()));
}

/// Apply a one-sided filter, rescaled to unit operator norm.
inline FilterResult applyFilter(const DensityMatrix& rho, const ComplexMatrix& w, Subsystem side) {
  const double nrm = operatorNorm(w);
  if (nrm < 1e-300) throw NumericalError("applyFilter: zero filter");
  const ComplexMatrix wn = w / nrm;
  const auto na = static_cast<Eigen::Index>(rho.dimA());
  const auto nb = static_cast<Eigen::Index>(rho.dimB());
  const ComplexMatrix local = side == Subsystem::A ? tensor(wn, ComplexMatrix::Identity(nb, nb))
                                                   : tensor(ComplexMatrix::Identity(na, na), wn);
  const ComplexMatrix out = conjugate(rho.mat(), local);
  const double p = out.trace().real();
  if (p < 1e-15) throw NumericalError("applyFilter: filtered branch has zero probability");
  return {wn, side, DensityMatrix::normalized(out, rho.dimA(), rho.dimB()), p};
}

/// Filter W = A_psi^dagger built from the most negative eigenvector psi of
/// rho^{T_B}; the filtered state has Tr(rho~ V) < 0, and for two qubits
/// <psi_-|rho~|psi_-> > 1/2.
inline FilterResult filterFromNegativeEigenvector(const DensityMatrix& rho) {
  const Spectrum pt = hermitianEig(partialTranspose(rho));
  if (pt.min() >= -tol::pos)
    throw PreconditionError("filterFromNegativeEigenvector: state is PPT (min PT eigenvalue " +
                            detail::sci(pt.min()) + ")");
  detail::requireSquareBipartition(rho, "filterFromNegativeEigenvector");
  const ComplexVector psi = pt.vector(pt.eigenvalues.size() - 1);
  const ComplexMatrix a = vectorToOperator(psi, rho.dimA());
  return applyFilter(rho, a.adjoint(), Subsystem::A);
}

/// Filter from the eigenvector psi violating the reduction criterion the
/// most: psi = (A (x) I) psi_+ with filter A^dagger on Alice when
/// rho_A (x) I - rho fails, or the mirror construction on Bob. The output
/// has singlet fraction > 1/d.
inline FilterResult reductionFilter(const DensityMatrix& rho) {
  detail::requireSquareBipartition(rho, "reductionFilter");
  const std::size_t d = rho.dimA();
  const auto n = static_cast<Eigen::Index>(d);
  const ComplexMatrix ra = partialTrace(rho.mat(), rho.dims(), Subsystem::B);
  const ComplexMatrix rb = partialTrace(rho.mat(), rho.dims(), Subsystem::A);
  const Spectrum sa = hermitianEig(tensor(ra, ComplexMatrix::Identity(n, n)) - rho.mat());
  const Spectrum sb = hermitianEig(tensor(ComplexMatrix::Identity(n, n), rb) - rho.mat());
  if (std::min(sa.min(), sb.min()) >= -tol::pos)
    throw PreconditionError("reductionFilter: reduction criterion is satisfied");
  if (sa.min() <= sb.min()) {
    const ComplexMatrix a = vectorToOperator(sa.vector(d * d - 1), d);
    return applyFilter(rho, a.adjoint(), Subsystem::A);
  }
  // psi = (I (x) B) psi_+ with B = sqrt(d) * (coefficient matrix)^T
  const ComplexMatrix b = vectorToOperator(sb.vector(d * d - 1), d).transpose();
  return applyFilter(rho, b.adjoint(), Subsystem::B);
}

/// Both parties project onto span{|0>, |1>}; the result is the normalized two-qubit state.
inline DensityMatrix isotropicReduceToQubits(const DensityMatrix& rho) {
  detail::requireSquareBipartition(rho, "isotropicReduceToQubits");
  const DensityMatrix iso = twirlUUstar(rho);
  const double dev = detail::maxAbs(iso.mat() - rho.mat());
  if (dev > 1e-10) throw InputError("isotropicReduceToQubits: input is not isotropic (deviation " + detail::sci(dev) + ")");
  const ProjectedQubits q = projectToQubits(rho.mat(), rho.dims(), lowestTwoLevels(rho.dimA(), rho.dimB()));
  if (!q.state) throw PreconditionError("isotropicReduceToQubits: projection probability below 1e-12");
  return *q.state;
}

// ---------------------------------------------------------------------------
// Activation of bound entanglement

/// F' = 2F / (2F + (1-F)(5-alpha)), P = (2F + (1-F)(5-alpha)) / 7.
inline StepResult activationStep(double f, double alpha) {
  if (!(f > 0.0 && f < 1.0)) throw InputError("activationStep: F must lie in (0, 1)");
  if (!(alpha >= 2.0 && alpha <= 5.0)) throw InputError("activationStep: alpha must lie in [2, 5]");
  const double den = 2.0 * f + (1.0 - f) * (5.0 - alpha);
  return {2.0 * f / den, den / 7.0};
}

/// One activation round on the explicit 81x81 state rho(F) (x) sigma_alpha.
inline StepResult activationSimulate(double f, double alpha) {
  if (!(f > 0.0 && f < 1.0)) throw InputError("activationSimulate: F must lie in (0, 1)");
  const XorRound r = bilateralXorRound(activationSource(f), stormerState(alpha));
  return {fidelityWith(r.source, maxEntangledVector(3)), r.successProb};
}

/// Repeated successful activation rounds; each consumes one bound entangled pair.
inline ProtocolTrace activationRun(double fIn, double alpha, std::size_t iterations) {
  ProtocolTrace trace{Protocol::Activation, {{"F_in", fIn}, {"alpha", alpha}}, {{0, fIn, 1.0, 1.0}}};
  double f = fIn;
  double yield = 1.0;
  for (std::size_t k = 1; k <= iterations; ++k) {
    const StepResult s = activationStep(f, alpha);
    f = s.fidelity;
    yield *= s.successProb;
    trace.steps.push_back({k, f, s.successProb, yield});
    if (!(f < 1.0)) break;
  }
  return trace;
}

// ---------------------------------------------------------------------------

/// f = (F d + 1) / (d + 1).
inline double teleportationFidelity(double fMax, std::size_t d) {
  if (!(fMax >= 0.0 && fMax <= 1.0)) throw InputError("teleportationFidelity: F must lie in [0, 1]");
  if (d < 2) throw InputError("teleportationFidelity: d must be >= 2");
  const double dd = static_cast<double>(d);
  return (fMax * dd + 1.0) / (dd + 1.0);
}

/// Relative entropy of entanglement of the isotropic state, in bits:
/// log d + F log F + (1-F) log((1-F)/(d-1)) for F > 1/d, zero otherwise.
inline double isotropicRelativeEntropy(double f, std::size_t d) {
  if (!(f >= 0.0 && f <= 1.0)) throw InputError("isotropicRelativeEntropy: F must lie in [0, 1]");
  const double dd = static_cast<double>(d);
  if (f <= 1.0 / dd) return 0.0;
  auto xlogx = [](double x) { return x > 0.0 ? x * std::log2(x) : 0.0; };
  const double g = 1.0 - f;
  return std::log2(dd) + xlogx(f) + (g > 0.0 ? g * std::log2(g / (dd - 1.0)) : 0.0);
}

// ---------------------------------------------------------------------------
// Two-qubit substate search

/// rho^{(x) n} regrouped as (A_1..A_n) (x) (B_1..B_n).
inline DensityMatrix tensorPower(const DensityMatrix& rho, std::size_t n) {
  if (n == 0) throw InputError("tensorPower: n must be >= 1");
  ComplexMatrix acc = rho.mat();
  std::size_t da = rho.dimA();
  std::size_t db = rho.dimB();
  for (std::size_t k = 1; k < n; ++k) {
    // acc on (A' B'), rho on (A B) -> (A' A)(B' B)
    const std::size_t na = da * rho.dimA();
    const std::size_t nb = db * rho.dimB();
    const ComplexMatrix joint = tensor(acc, rho.mat());
    ComplexMatrix out(static_cast<Eigen::Index>(na * nb), static_cast<Eigen::Index>(na * nb));
    auto from = [&](std::size_t a1, std::size_t b1, std::size_t a2, std::size_t b2) {
      return static_cast<Eigen::Index>(((a1 * db + b1) * rho.dimA() + a2) * rho.dimB() + b2);
    };
    auto to = [&](std::size_t a1, std::size_t b1, std::size_t a2, std::size_t b2) {
      return static_cast<Eigen::Index>((a1 * rho.dimA() + a2) * nb + b1 * rho.dimB() + b2);
    };
    std::vector<Eigen::Index> perm(na * nb);
    for (std::size_t a1 = 0; a1 < da; ++a1)
      for (std::size_t b1 = 0; b1 < db; ++b1)
        for (std::size_t a2 = 0; a2 < rho.dimA(); ++a2)
          for (std::size_t b2 = 0; b2 < rho.dimB(); ++b2)
            perm[static_cast<std::size_t>(from(a1, b1, a2, b2))] = to(a1, b1, a2, b2);
    for (std::size_t i = 0; i < perm.size(); ++i)
      for (std::size_t j = 0; j < perm.size(); ++j)
        out(perm[i], perm[j]) = joint(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    acc = std::move(out);
    da = na;
    db = nb;
  }
  return DensityMatrix(acc, da, db);
}

struct DistillabilityCertificate {
  LocalProjection projection;
  std::size_t copies = 1;
  double probability = 0.0;
  double ptMinEigenvalue = 0.0;
};

/// Search for local rank-2 projectors P, Q with (P (x) Q) rho^{(x) n} (P (x) Q)
/// NPT. Candidates are tried first, then `budget` Haar-random projector
/// pairs. A certificate proves distillability; no find is inconclusive.
inline std::optional<DistillabilityCertificate> distillabilityWitness2x2Substate(
    const DensityMatrix& rho, std::size_t n, std::size_t budget, RngStream& rng,
    const std::vector<LocalProjection>& candidates = {}) {
  if (n < 1 || n > 2) throw InputError("distillabilityWitness2x2Substate: n must be 1 or 2");
  if (rho.dimA() < 2 || rho.dimB() < 2) throw InputError("distillabilityWitness2x2Substate: need local dims >= 2");
  const DensityMatrix state = n == 1 ? rho : tensorPower(rho, n);
  auto attempt = [&](const LocalProjection& proj) -> std::optional<DistillabilityCertificate> {
    const ProjectedQubits q = projectToQubits(state.mat(), state.dims(), proj);
    if (q.state && q.npt) return DistillabilityCertificate{proj, n, q.probability, q.ptMinEigenvalue};
    return std::nullopt;
  };
  for (const auto& c : candidates)
    if (auto cert = attempt(c)) return cert;
  for (std::size_t k = 0; k < budget; ++k) {
    const ComplexMatrix ua = randomUnitary(state.dimA(), rng);
    const ComplexMatrix ub = randomUnitary(state.dimB(), rng);
    if (auto cert = attempt({ua.leftCols(2), ub.leftCols(2)})) return cert;
  }
  return std::nullopt;
}

}  // namespace entsep
