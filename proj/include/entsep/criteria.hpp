#pragma once

// Separability-criteria battery and the derived classification
// (separable / free entangled / PPT entangled / unknown).

#include <entsep/maps.hpp>
#include <entsep/matcore.hpp>
#include <entsep/random.hpp>
#include <entsep/states.hpp>
#include <entsep/upb.hpp>

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace entsep {

enum class Criterion {
  Ppt,
  Reduction,
  Entropic,
  ChshM,
  SingletFraction,
  FullyEntangledFraction,
  RankBound,
  ChoiMap,
  SeparableDecomposition,
  UpbRange,
  LocalProjection,
};

enum class Verdict { Satisfied, Violated, Marginal, NotApplicable };

/// Renyi order for the entropic inequalities.
enum class EntropyOrder { Zero, One, Two, Infinity };

inline const char* toString(Criterion c) {
  switch (c) {
    case Criterion::Ppt: return "ppt";
    case Criterion::Reduction: return "reduction";
    case Criterion::Entropic: return "entropic";
    case Criterion::ChshM: return "chsh-m";
    case Criterion::SingletFraction: return "singlet-fraction";
    case Criterion::FullyEntangledFraction: return "fully-entangled-fraction";
    case Criterion::RankBound: return "rank-bound";
    case Criterion::ChoiMap: return "choi-map";
    case Criterion::SeparableDecomposition: return "separable-decomposition";
    case Criterion::UpbRange: return "upb-range";
    case Criterion::LocalProjection: return "local-projection";
  }
  return "?";
}

inline const char* toString(Verdict v) {
  switch (v) {
    case Verdict::Satisfied: return "satisfied";
    case Verdict::Violated: return "violated";
    case Verdict::Marginal: return "marginal";
    case Verdict::NotApplicable: return "not-applicable";
  }
  return "?";
}

inline const char* toString(EntropyOrder o) {
  switch (o) {
    case EntropyOrder::Zero: return "0";
    case EntropyOrder::One: return "1";
    case EntropyOrder::Two: return "2";
    case EntropyOrder::Infinity: return "inf";
  }
  return "?";
}

struct CriterionReport {
  Criterion criterion = Criterion::Ppt;
  Verdict verdict = Verdict::NotApplicable;
  /// Named numeric evidence, in a stable order.
  std::vector<std::pair<std::string, double>> evidence;
  std::string detail;

  std::optional<double> get(const std::string& key) const {
    for (const auto& [k, v] : evidence)
      if (k == key) return v;
    return std::nullopt;
  }
  double at(const std::string& key) const {
    if (auto v = get(key)) return *v;
    throw InputError("CriterionReport: no evidence named '" + key + "'");
  }
};

namespace detail {

/// Tri-state verdict for "quantity >= threshold must hold".
inline Verdict lowerBoundVerdict(double value, double threshold, double slack) {
  if (value < threshold - slack) return Verdict::Violated;
  if (value > threshold + slack) return Verdict::Satisfied;
  return Verdict::Marginal;
}

/// Tri-state verdict for "quantity <= threshold must hold".
inline Verdict upperBoundVerdict(double value, double threshold, double slack) {
  return lowerBoundVerdict(-value, -threshold, slack);
}

inline void requireSquareBipartition(const DensityMatrix& rho, const char* what) {
  if (rho.dimA() != rho.dimB())
    throw InputError(std::string(what) + ": requires dimA == dimB, got " + std::to_string(rho.dimA()) + "x" +
                     std::to_string(rho.dimB()));
}

}  // namespace detail

// ---------------------------------------------------------------------------

/// A PT that is positive semidefinite up to tau_pos counts as Satisfied, so
/// PPT states whose PT has a kernel (rho_b, UPB complements) are not Marginal.
/// The detail string flags the kernel case.
inline CriterionReport pptCheck(const DensityMatrix& rho) {
  const double lo = minEigenvalue(partialTranspose(rho));
  const Verdict v = lo < -tol::pos ? Verdict::Violated : Verdict::Satisfied;
  return {Criterion::Ppt, v, {{"minEigenvalue", lo}, {"threshold", 0.0}},
          std::abs(lo) <= tol::pos ? "PT has a kernel" : ""};
}

/// I (x) rho_B - rho >= 0 and rho_A (x) I - rho >= 0.
inline CriterionReport reductionCheck(const DensityMatrix& rho) {
  const auto na = static_cast<Eigen::Index>(rho.dimA());
  const auto nb = static_cast<Eigen::Index>(rho.dimB());
  const ComplexMatrix ra = partialTrace(rho.mat(), rho.dims(), Subsystem::B);
  const ComplexMatrix rb = partialTrace(rho.mat(), rho.dims(), Subsystem::A);
  const double loB = minEigenvalue(tensor(ComplexMatrix::Identity(na, na), rb) - rho.mat());
  const double loA = minEigenvalue(tensor(ra, ComplexMatrix::Identity(nb, nb)) - rho.mat());
  const double lo = std::min(loA, loB);
  return {Criterion::Reduction,
          detail::lowerBoundVerdict(lo, 0.0, tol::pos),
          {{"minEigenvalueIxRhoB", loB}, {"minEigenvalueRhoAxI", loA}, {"threshold", 0.0}},
          {}};
}

/// Renyi entropy S_alpha in bits from a spectrum. S_0 uses the numerical
/// rank, S_1 uses 0 log 0 = 0, S_inf = -log2 of the largest eigenvalue.
inline double renyiEntropy(const std::vector<double>& eigenvalues, EntropyOrder order) {
  switch (order) {
    case EntropyOrder::Zero: return std::log2(static_cast<double>(std::max<std::size_t>(1, numericalRank(eigenvalues))));
    case EntropyOrder::One: {
      double s = 0.0;
      for (double x : eigenvalues)
        if (x > 0.0) s -= x * std::log2(x);
      return s;
    }
    case EntropyOrder::Two: {
      double p = 0.0;
      for (double x : eigenvalues) p += x * x;
      return -std::log2(p);
    }
    case EntropyOrder::Infinity: return -std::log2(*std::max_element(eigenvalues.begin(), eigenvalues.end()));
  }
  return 0.0;
}

inline double renyiEntropy(const ComplexMatrix& m, EntropyOrder order) {
  return renyiEntropy(hermitianEig(m).eigenvalues, order);
}

/// S(rho_A) <= S(rho) and S(rho_B) <= S(rho) for the chosen Renyi order.
inline CriterionReport entropicCheck(const DensityMatrix& rho, EntropyOrder order) {
  const double s = renyiEntropy(rho.mat(), order);
  const double sa = renyiEntropy(partialTrace(rho.mat(), rho.dims(), Subsystem::B), order);
  const double sb = renyiEntropy(partialTrace(rho.mat(), rho.dims(), Subsystem::A), order);
  const double excess = std::max(sa, sb) - s;
  CriterionReport r{Criterion::Entropic,
                    detail::upperBoundVerdict(excess, 0.0, tol::ent),
                    {{"S", s}, {"S_A", sa}, {"S_B", sb}, {"excess", excess}, {"threshold", 0.0}},
                    std::string("alpha=") + toString(order)};
  return r;
}

/// Correlation matrix T_ij = Tr rho (sigma_i (x) sigma_j) of a two-qubit state.
inline RealMatrix correlationMatrix(const DensityMatrix& rho) {
  RealMatrix t(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t(i, j) = expectation(tensor(pauli(i + 1), pauli(j + 1)), rho.mat());
  return t;
}

/// M(rho) = sum of the two largest eigenvalues of T^T T; CHSH is violated iff M > 1.
inline CriterionReport chshM(const DensityMatrix& rho) {
  if (rho.dimA() != 2 || rho.dimB() != 2) return {Criterion::ChshM, Verdict::NotApplicable, {}, "requires 2x2"};
  const RealMatrix t = correlationMatrix(rho);
  const RealMatrix ttt = t.transpose() * t;
  const Spectrum s = hermitianEig(ttt.cast<Complex>());
  const double m = s.eigenvalues[0] + s.eigenvalues[1];
  return {Criterion::ChshM, detail::upperBoundVerdict(m, 1.0, tol::pos), {{"M", m}, {"threshold", 1.0}}, {}};
}

/// F = <psi_+|rho|psi_+>.
inline double singletFraction(const DensityMatrix& rho) {
  detail::requireSquareBipartition(rho, "singletFraction");
  return clamp01(fidelityWith(rho, maxEntangledVector(rho.dimA())));
}

/// Separable states satisfy F <= 1/d.
inline CriterionReport singletFractionCheck(const DensityMatrix& rho) {
  if (rho.dimA() != rho.dimB()) return {Criterion::SingletFraction, Verdict::NotApplicable, {}, "requires dimA == dimB"};
  const double f = singletFraction(rho);
  const double bound = 1.0 / static_cast<double>(rho.dimA());
  return {Criterion::SingletFraction, detail::upperBoundVerdict(f, bound, tol::pos), {{"F", f}, {"threshold", bound}}, {}};
}

struct FullyEntangledFractionResult {
  /// Certified lower bound on the fully entangled fraction.
  double value = 0.0;
  ComplexMatrix unitaryA;
  ComplexMatrix unitaryB;
  std::size_t restarts = 0;
};

namespace detail {

/// <psi_+|(U (x) I)^dagger rho (U (x) I)|psi_+>.
inline double rotatedSingletFraction(const ComplexMatrix& rho, const ComplexMatrix& u) {
  const Eigen::Index d = u.rows();
  ComplexVector phi(d * d);
  const double amp = 1.0 / std::sqrt(static_cast<double>(d));
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index k = 0; k < d; ++k) phi(i * d + k) = u(i, k) * amp;
  return phi.dot(rho * phi).real();
}

/// exp(i s G) for the g-th generator of a traceless Hermitian basis
/// (symmetric and antisymmetric off-diagonal pairs, then diagonal phases).
inline ComplexMatrix elementaryUnitary(Eigen::Index d, std::size_t g, double s) {
  ComplexMatrix e = ComplexMatrix::Identity(d, d);
  std::size_t idx = 0;
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index k = j + 1; k < d; ++k) {
      if (idx == g) {
        e(j, j) = e(k, k) = std::cos(s);
        e(j, k) = e(k, j) = Complex(0.0, std::sin(s));
        return e;
      }
      if (idx + 1 == g) {
        e(j, j) = e(k, k) = std::cos(s);
        e(j, k) = std::sin(s);
        e(k, j) = -std::sin(s);
        return e;
      }
      idx += 2;
    }
  const auto diag = static_cast<Eigen::Index>(g - idx) + 1;
  e(diag, diag) = std::polar(1.0, s);
  return e;
}

}  // namespace detail

/// Lower bound on max over maximally entangled Phi of <Phi|rho|Phi>.
///
/// Every maximally entangled vector is (U1 (x) U2) psi_+ = (U1 U2^T (x) I) psi_+,
/// so the search runs over a single unitary on A: the first restart starts
/// from U = I, later ones from Haar-random unitaries, each refined by
/// coordinate ascent over the d^2 - 1 local generators with step halving.
inline FullyEntangledFractionResult fullyEntangledFraction(const DensityMatrix& rho, std::size_t budget,
                                                           RngStream& rng) {
  detail::requireSquareBipartition(rho, "fullyEntangledFraction");
  const auto d = static_cast<Eigen::Index>(rho.dimA());
  const std::size_t generators = static_cast<std::size_t>(d * d - 1);
  FullyEntangledFractionResult best;
  best.value = -std::numeric_limits<double>::infinity();
  best.restarts = std::max<std::size_t>(budget, 1);
  for (std::size_t r = 0; r < best.restarts; ++r) {
    ComplexMatrix u = r == 0 ? ComplexMatrix(ComplexMatrix::Identity(d, d)) : randomUnitary(rho.dimA(), rng);
    double f = detail::rotatedSingletFraction(rho.mat(), u);
    double step = 0.5;
    for (int sweep = 0; sweep < 20000 && step > 1e-9; ++sweep) {
      const double start = f;
      for (std::size_t g = 0; g < generators; ++g) {
        for (double s : {step, -step}) {
          const ComplexMatrix cand = u * detail::elementaryUnitary(d, g, s);
          const double fc = detail::rotatedSingletFraction(rho.mat(), cand);
          if (fc > f) {
            f = fc;
            u = cand;
            break;
          }
        }
      }
      if (f - start < 1e-10) step *= 0.5;
    }
    if (f > best.value) {
      best.value = f;
      best.unitaryA = u;
    }
  }
  best.unitaryB = ComplexMatrix::Identity(d, d);
  best.value = clamp01(best.value);
  return best;
}

inline CriterionReport fullyEntangledFractionCheck(const DensityMatrix& rho, std::size_t budget, RngStream& rng) {
  if (rho.dimA() != rho.dimB())
    return {Criterion::FullyEntangledFraction, Verdict::NotApplicable, {}, "requires dimA == dimB"};
  const auto r = fullyEntangledFraction(rho, budget, rng);
  const double bound = 1.0 / static_cast<double>(rho.dimA());
  return {Criterion::FullyEntangledFraction,
          detail::upperBoundVerdict(r.value, bound, tol::pos),
          {{"FEF", r.value}, {"threshold", bound}, {"restarts", static_cast<double>(r.restarts)}},
          "lower bound"};
}

/// R(rho) >= max(R(rho_A), R(rho_B)) holds for every undistillable state;
/// a violation proves distillability.
inline CriterionReport rankBoundCheck(const DensityMatrix& rho) {
  const auto r = numericalRank(hermitianEig(rho.mat()).eigenvalues);
  const auto ra = numericalRank(hermitianEig(partialTrace(rho.mat(), rho.dims(), Subsystem::B)).eigenvalues);
  const auto rb = numericalRank(hermitianEig(partialTrace(rho.mat(), rho.dims(), Subsystem::A)).eigenvalues);
  const bool ok = r >= std::max(ra, rb);
  return {Criterion::RankBound,
          ok ? Verdict::Satisfied : Verdict::Violated,
          {{"rank", static_cast<double>(r)},
           {"rankA", static_cast<double>(ra)},
           {"rankB", static_cast<double>(rb)},
           {"threshold", static_cast<double>(std::max(ra, rb))}},
          {}};
}

inline CriterionReport choiMapCheck(const DensityMatrix& rho) {
  if (rho.dimA() != 3 || rho.dimB() != 3) return {Criterion::ChoiMap, Verdict::NotApplicable, {}, "requires 3x3"};
  const ChoiDetection c = choiDetect(rho);
  return {Criterion::ChoiMap,
          detail::lowerBoundVerdict(c.minEig, 0.0, tol::pos),
          {{"minEigenvalue", c.minEig}, {"scaledMinEigenvalue", c.scaledMinEig}, {"threshold", 0.0}},
          {}};
}

// ---------------------------------------------------------------------------
// Local two-dimensional projections

/// Columns span the local two-dimensional subspaces kept by Alice and Bob.
struct LocalProjection {
  ComplexMatrix alice;  // dimA x 2, orthonormal columns
  ComplexMatrix bob;    // dimB x 2, orthonormal columns
};

/// P = |0><0| + |1><1| on both sides.
inline LocalProjection lowestTwoLevels(std::size_t dA, std::size_t dB) {
  return {ComplexMatrix::Identity(static_cast<Eigen::Index>(dA), 2),
          ComplexMatrix::Identity(static_cast<Eigen::Index>(dB), 2)};
}

struct ProjectedQubits {
  /// Probability that both local projections succeed.
  double probability = 0.0;
  /// Normalized two-qubit state, when probability > 0.
  std::optional<DensityMatrix> state;
  double ptMinEigenvalue = 0.0;
  bool npt = false;
};

/// (P (x) Q)^dagger rho (P (x) Q), normalized, and its PT test.
inline ProjectedQubits projectToQubits(const ComplexMatrix& rho, Dims dims, const LocalProjection& proj) {
  detail::requireDims(rho, dims, "projectToQubits");
  if (static_cast<std::size_t>(proj.alice.rows()) != dims.a || static_cast<std::size_t>(proj.bob.rows()) != dims.b ||
      proj.alice.cols() != 2 || proj.bob.cols() != 2)
    throw InputError("projectToQubits: projector shapes do not match the state");
  const ComplexMatrix iso = tensor(proj.alice, proj.bob);
  const ComplexMatrix m = iso.adjoint() * rho * iso;
  ProjectedQubits out;
  out.probability = m.trace().real();
  if (out.probability < 1e-12) return out;
  out.state = DensityMatrix::normalized(m, 2, 2);
  out.ptMinEigenvalue = minEigenvalue(partialTranspose(*out.state));
  out.npt = out.ptMinEigenvalue < -tol::pos;
  return out;
}

inline CriterionReport localProjectionCheck(const DensityMatrix& rho, const LocalProjection& proj) {
  const ProjectedQubits q = projectToQubits(rho.mat(), rho.dims(), proj);
  if (!q.state)
    return {Criterion::LocalProjection, Verdict::NotApplicable, {{"probability", q.probability}}, "zero probability"};
  return {Criterion::LocalProjection,
          detail::lowerBoundVerdict(q.ptMinEigenvalue, 0.0, tol::pos),
          {{"probability", q.probability}, {"ptMinEigenvalue", q.ptMinEigenvalue}, {"threshold", 0.0}},
          "PT of the projected two-qubit state"};
}

// ---------------------------------------------------------------------------
// Classification

enum class EntanglementClass {
  Separable,
  FreeEntangled,
  PptEntangled,
  /// NPT, so entangled, but no distillability proof was found.
  NptEntangled,
  Unknown,
};

inline const char* toString(EntanglementClass c) {
  switch (c) {
    case EntanglementClass::Separable: return "separable";
    case EntanglementClass::FreeEntangled: return "free-entangled";
    case EntanglementClass::PptEntangled: return "ppt-entangled";
    case EntanglementClass::NptEntangled: return "npt-entangled";
    case EntanglementClass::Unknown: return "unknown";
  }
  return "?";
}

struct Classification {
  EntanglementClass label = EntanglementClass::Unknown;
  std::vector<CriterionReport> basis;
  std::string reason;
};

/// Construction metadata that unlocks certificates the battery cannot find alone.
struct ClassificationHints {
  std::optional<SeparableDecomposition> decomposition;
  /// The state is claimed to live on the complement of this UPB.
  std::optional<Upb> upb;
  std::optional<LocalProjection> projection;
};

/// Tr(rho P_upb): zero iff the range of rho is orthogonal to every UPB member.
inline double upbOverlap(const DensityMatrix& rho, const Upb& upb) {
  if (!(upb.dims() == rho.dims())) throw InputError("upbOverlap: UPB dims do not match the state");
  return expectation(upbProjector(upb), rho.mat());
}

inline CriterionReport upbRangeCheck(const DensityMatrix& rho, const Upb& upb) {
  const UpbReport v = validateUpb(upb);
  const double overlap = upbOverlap(rho, upb);
  const bool valid = v.orthogonal && v.unextendible;
  // Satisfied means "range contains product vectors" is possible; Violated
  // means the range lies in a UPB complement, which contains none.
  const Verdict verdict = valid && overlap <= 1e-12 ? Verdict::Violated : Verdict::Satisfied;
  return {Criterion::UpbRange,
          verdict,
          {{"overlap", overlap}, {"orthogonal", v.orthogonal ? 1.0 : 0.0}, {"unextendible", v.unextendible ? 1.0 : 0.0}},
          "range orthogonal to an unextendible product basis"};
}

/// Separable / free entangled / PPT entangled / NPT entangled / unknown.
///
/// 2x2 and 2x3: separable iff PPT, otherwise distillable. Beyond that, NPT
/// only proves entanglement; distillability needs a reduction violation or an
/// NPT two-qubit projection. PPT entanglement needs Choi-map detection (3x3)
/// or the UPB range argument.
inline Classification classify(const DensityMatrix& rho, const ClassificationHints& hints = {}) {
  Classification c;
  const CriterionReport ppt = pptCheck(rho);
  const CriterionReport red = reductionCheck(rho);
  c.basis = {ppt, red};
  const bool npt = ppt.verdict == Verdict::Violated;
  const bool lowDim = std::min(rho.dimA(), rho.dimB()) == 2 && rho.dim() <= 6;

  if (hints.decomposition) {
    const bool ok = hints.decomposition->certifies(rho);
    c.basis.push_back({Criterion::SeparableDecomposition,
                       ok ? Verdict::Satisfied : Verdict::NotApplicable,
                       {{"terms", static_cast<double>(hints.decomposition->terms.size())}},
                       ok ? "explicit product-state mixture reproduces the state" : "decomposition does not match"});
    if (ok && !npt) {
      c.label = EntanglementClass::Separable;
      c.reason = "explicit separable decomposition";
      if (rho.dimA() == 3 && rho.dimB() == 3) c.basis.push_back(choiMapCheck(rho));
      return c;
    }
  }

  if (npt) {
    if (lowDim) {
      c.label = EntanglementClass::FreeEntangled;
      c.reason = "NPT in 2x2 or 2x3";
      return c;
    }
    if (red.verdict == Verdict::Violated) {
      c.label = EntanglementClass::FreeEntangled;
      c.reason = "reduction criterion violated";
      return c;
    }
    if (hints.projection) {
      const CriterionReport lp = localProjectionCheck(rho, *hints.projection);
      c.basis.push_back(lp);
      if (lp.verdict == Verdict::Violated) {
        c.label = EntanglementClass::FreeEntangled;
        c.reason = "NPT two-qubit state after local projections";
        return c;
      }
    }
    c.label = EntanglementClass::NptEntangled;
    c.reason = "NPT; distillability not established";
    return c;
  }

  if (lowDim) {
    c.label = EntanglementClass::Separable;
    c.reason = "PPT in 2x2 or 2x3";
    return c;
  }
  if (rho.dimA() == 3 && rho.dimB() == 3) {
    const CriterionReport choi = choiMapCheck(rho);
    c.basis.push_back(choi);
    if (choi.verdict == Verdict::Violated) {
      c.label = EntanglementClass::PptEntangled;
      c.reason = "PPT and detected by the Choi map";
      return c;
    }
  }
  if (hints.upb) {
    const CriterionReport range = upbRangeCheck(rho, *hints.upb);
    c.basis.push_back(range);
    if (range.verdict == Verdict::Violated) {
      c.label = EntanglementClass::PptEntangled;
      c.reason = "PPT with range orthogonal to a UPB";
      return c;
    }
  }
  c.label = EntanglementClass::Unknown;
  c.reason = "PPT without an entanglement or separability proof";
  return c;
}

/// Hints implied by how a family is constructed.
inline ClassificationHints hintsFor(const StateFamilySpec& spec) {
  ClassificationHints h;
  if (const auto* s = std::get_if<family::Stormer>(&spec.family)) {
    h.decomposition = stormerSeparableDecomposition(s->alpha);
    h.projection = lowestTwoLevels(3, 3);
  } else if (std::holds_alternative<family::TilesBoundEntangled>(spec.family)) {
    h.upb = tilesUpb();
  }
  return h;
}

/// The full battery used by the `analyze` command.
inline std::vector<CriterionReport> criteriaBattery(const DensityMatrix& rho, std::size_t fefBudget, RngStream& rng) {
  std::vector<CriterionReport> out{pptCheck(rho), reductionCheck(rho)};
  for (auto o : {EntropyOrder::Zero, EntropyOrder::One, EntropyOrder::Two, EntropyOrder::Infinity})
    out.push_back(entropicCheck(rho, o));
  out.push_back(chshM(rho));
  out.push_back(singletFractionCheck(rho));
  out.push_back(fullyEntangledFractionCheck(rho, fefBudget, rng));
  out.push_back(rankBoundCheck(rho));
  out.push_back(choiMapCheck(rho));
  return out;
}

}  // namespace entsep
