#pragma once

// Unextendible product bases: validation by the exact subset/span test and
// the PPT entangled state supported on the orthogonal complement.

#include <entsep/matcore.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace entsep {

struct ProductVector {
  ComplexVector a;
  ComplexVector b;

  ComplexVector full() const { return tensor(a, b); }
};

/// Orthogonal product vectors, fewer than dimA * dimB of them. The
/// constructor enforces the count bound and normalization of each factor.
class Upb {
 public:
  Upb(Dims dims, std::vector<ProductVector> vectors) : dims_(dims), vectors_(std::move(vectors)) {
    if (dims_.a == 0 || dims_.b == 0) throw InputError("Upb: zero dimension");
    if (vectors_.size() >= dims_.total())
      throw InputError("Upb: " + std::to_string(vectors_.size()) +
                       " vectors is not fewer than the space dimension " + std::to_string(dims_.total()));
    for (std::size_t i = 0; i < vectors_.size(); ++i) {
      const auto& v = vectors_[i];
      if (static_cast<std::size_t>(v.a.size()) != dims_.a || static_cast<std::size_t>(v.b.size()) != dims_.b)
        throw InputError("Upb: member " + std::to_string(i) + " has wrong factor dimensions");
      const double dev = std::max(std::abs(v.a.norm() - 1.0), std::abs(v.b.norm() - 1.0));
      if (dev > tol::norm)
        throw InputError("Upb: member " + std::to_string(i) + " norm deviation " + detail::sci(dev) + " > tau_norm");
    }
  }

  Dims dims() const { return dims_; }
  const std::vector<ProductVector>& vectors() const { return vectors_; }
  std::size_t size() const { return vectors_.size(); }

  Upb without(std::size_t index) const {
    std::vector<ProductVector> rest;
    for (std::size_t i = 0; i < vectors_.size(); ++i)
      if (i != index) rest.push_back(vectors_[i]);
    return Upb(dims_, std::move(rest));
  }

 private:
  Dims dims_;
  std::vector<ProductVector> vectors_;
};

struct UpbReport {
  bool orthogonal = false;
  bool unextendible = false;
  double maxGramDeviation = 0.0;
  /// A product vector orthogonal to every member, when one exists.
  std::optional<ProductVector> extension;
};

namespace detail {

inline ComplexMatrix spanOperator(const std::vector<const ComplexVector*>& vs, Eigen::Index dim) {
  ComplexMatrix s = ComplexMatrix::Zero(dim, dim);
  for (const auto* v : vs) s += (*v) * v->adjoint();
  return s;
}

}  // namespace detail

/// Orthogonality via the Gram matrix; unextendibility via the subset test:
/// a product vector a (x) b orthogonal to all members exists iff for some
/// subset S the A-parts in S fail to span H_A and the B-parts outside S
/// fail to span H_B.
inline UpbReport validateUpb(const Upb& upb) {
  UpbReport report;
  const auto& vs = upb.vectors();
  const std::size_t k = vs.size();
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      const Complex g = vs[i].full().dot(vs[j].full());
      report.maxGramDeviation = std::max(report.maxGramDeviation, std::abs(g - (i == j ? 1.0 : 0.0)));
    }
  report.orthogonal = report.maxGramDeviation <= tol::norm;

  const auto da = static_cast<Eigen::Index>(upb.dims().a);
  const auto db = static_cast<Eigen::Index>(upb.dims().b);
  report.unextendible = true;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
    std::vector<const ComplexVector*> inS;
    std::vector<const ComplexVector*> outS;
    for (std::size_t i = 0; i < k; ++i) {
      if (mask & (std::uint64_t{1} << i))
        inS.push_back(&vs[i].a);
      else
        outS.push_back(&vs[i].b);
    }
    const Spectrum sa = hermitianEig(detail::spanOperator(inS, da));
    const Spectrum sb = hermitianEig(detail::spanOperator(outS, db));
    const bool spansA = numericalRank(sa.eigenvalues) == upb.dims().a;
    const bool spansB = numericalRank(sb.eigenvalues) == upb.dims().b;
    if (!spansA && !spansB) {
      report.unextendible = false;
      ProductVector w{sa.vector(upb.dims().a - 1), sb.vector(upb.dims().b - 1)};
      w.a.normalize();
      w.b.normalize();
      report.extension = std::move(w);
      break;
    }
  }
  return report;
}

inline ComplexMatrix upbProjector(const Upb& upb) {
  const auto n = static_cast<Eigen::Index>(upb.dims().total());
  ComplexMatrix p = ComplexMatrix::Zero(n, n);
  for (const auto& v : upb.vectors()) p += projector(v.full());
  return p;
}

/// (I - P) / (dimA*dimB - k), the uniform state on the complement of the UPB span.
inline DensityMatrix upbComplementState(const Upb& upb) {
  const UpbReport r = validateUpb(upb);
  if (!r.orthogonal || !r.unextendible)
    throw InputError(std::string("upbComplementState: invalid UPB (") + (r.orthogonal ? "" : "not orthogonal") +
                     (!r.orthogonal && !r.unextendible ? ", " : "") + (r.unextendible ? "" : "extendible") + ")");
  const auto n = static_cast<Eigen::Index>(upb.dims().total());
  const ComplexMatrix comp = ComplexMatrix::Identity(n, n) - upbProjector(upb);
  return DensityMatrix(comp / static_cast<double>(upb.dims().total() - upb.size()), upb.dims().a, upb.dims().b);
}

/// The five-member "tiles" UPB of 3 (x) 3.
inline Upb tilesUpb() {
  auto ket = [](Complex x0, Complex x1, Complex x2) {
    ComplexVector v(3);
    v << x0, x1, x2;
    return ComplexVector(v.normalized());
  };
  const ComplexVector e0 = ket(1, 0, 0);
  const ComplexVector e2 = ket(0, 0, 1);
  const ComplexVector zeroMinusOne = ket(1, -1, 0);
  const ComplexVector oneMinusTwo = ket(0, 1, -1);
  const ComplexVector all = ket(1, 1, 1);
  return Upb({3, 3}, {
                         {e0, zeroMinusOne},
                         {zeroMinusOne, e2},
                         {e2, oneMinusTwo},
                         {oneMinusTwo, e0},
                         {all, all},
                     });
}

}  // namespace entsep
