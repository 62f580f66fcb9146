#pragma once

// Positive maps, entanglement witnesses and the Jamiolkowski correspondence
// (1/d) A = (I (x) Lambda) P_+ between them.

#include <entsep/matcore.hpp>
#include <entsep/random.hpp>
#include <entsep/states.hpp>

#include <functional>
#include <limits>
#include <string>
#include <utility>

namespace entsep {

/// Linear map from dimIn x dimIn matrices to dimOut x dimOut matrices.
///
/// The canonical representation is the Choi-style operator
/// A = sum_ij |i><j| (x) Lambda(|i><j|), i.e. d (I (x) Lambda) P_+.
/// A closure form may be kept alongside for cross-checks.
class LinearMap {
 public:
  using Closure = std::function<ComplexMatrix(const ComplexMatrix&)>;

  LinearMap(std::size_t dimIn, std::size_t dimOut, ComplexMatrix choi, std::string name = {}, Closure closure = {})
      : dimIn_(dimIn), dimOut_(dimOut), choi_(std::move(choi)), name_(std::move(name)), closure_(std::move(closure)) {
    detail::requireDims(choi_, {dimIn_, dimOut_}, "LinearMap");
  }

  static LinearMap fromClosure(std::size_t dimIn, std::size_t dimOut, Closure f, std::string name = {}) {
    const auto n = static_cast<Eigen::Index>(dimIn * dimOut);
    ComplexMatrix choi = ComplexMatrix::Zero(n, n);
    const auto din = static_cast<Eigen::Index>(dimIn);
    const auto dout = static_cast<Eigen::Index>(dimOut);
    for (Eigen::Index i = 0; i < din; ++i)
      for (Eigen::Index j = 0; j < din; ++j) {
        ComplexMatrix e = ComplexMatrix::Zero(din, din);
        e(i, j) = 1.0;
        choi.block(i * dout, j * dout, dout, dout) = f(e);
      }
    return LinearMap(dimIn, dimOut, std::move(choi), std::move(name), std::move(f));
  }

  std::size_t dimIn() const { return dimIn_; }
  std::size_t dimOut() const { return dimOut_; }
  const ComplexMatrix& choi() const { return choi_; }
  const std::string& name() const { return name_; }
  bool hasClosure() const { return static_cast<bool>(closure_); }

  /// Lambda(X) = sum_ij X_ij Lambda(|i><j|), read off the Choi blocks.
  ComplexMatrix operator()(const ComplexMatrix& x) const {
    if (static_cast<std::size_t>(x.rows()) != dimIn_ || x.rows() != x.cols())
      throw InputError("LinearMap: input is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                       ", expected " + std::to_string(dimIn_) + "x" + std::to_string(dimIn_));
    const auto din = static_cast<Eigen::Index>(dimIn_);
    const auto dout = static_cast<Eigen::Index>(dimOut_);
    ComplexMatrix out = ComplexMatrix::Zero(dout, dout);
    for (Eigen::Index i = 0; i < din; ++i)
      for (Eigen::Index j = 0; j < din; ++j)
        if (x(i, j) != Complex(0.0)) out += x(i, j) * choi_.block(i * dout, j * dout, dout, dout);
    return out;
  }

  ComplexMatrix applyClosure(const ComplexMatrix& x) const {
    if (!closure_) throw InputError("LinearMap: no closure form for '" + name_ + "'");
    return closure_(x);
  }

 private:
  std::size_t dimIn_;
  std::size_t dimOut_;
  ComplexMatrix choi_;
  std::string name_;
  Closure closure_;
};

struct Witness {
  ComplexMatrix op;
  Dims dims;
};

inline LinearMap transpositionMap(std::size_t d) {
  if (d < 2) throw InputError("transpositionMap: d must be >= 2");
  return LinearMap::fromClosure(d, d, [](const ComplexMatrix& x) -> ComplexMatrix { return x.transpose(); },
                                "transposition");
}

/// Lambda(X) = (Tr X) I - X.
inline LinearMap reductionMap(std::size_t d) {
  if (d < 2) throw InputError("reductionMap: d must be >= 2");
  return LinearMap::fromClosure(
      d, d,
      [](const ComplexMatrix& x) -> ComplexMatrix {
        return x.trace() * ComplexMatrix::Identity(x.rows(), x.cols()) - x;
      },
      "reduction");
}

/// The non-decomposable positive map on 3x3 matrices: flip the sign of the
/// off-diagonal entries and add diag(a33, a11, a22).
inline LinearMap choiMap() {
  return LinearMap::fromClosure(
      3, 3,
      [](const ComplexMatrix& x) -> ComplexMatrix {
        ComplexMatrix y = -x;
        for (Eigen::Index i = 0; i < 3; ++i) y(i, i) = x(i, i);
        y(0, 0) += x(2, 2);
        y(1, 1) += x(0, 0);
        y(2, 2) += x(1, 1);
        return y;
      },
      "choi");
}

/// (I (x) Lambda) rho, applied block by block over the A index.
inline ComplexMatrix applyToB(const LinearMap& map, const ComplexMatrix& rho, Dims dims) {
  detail::requireDims(rho, dims, "applyToB");
  if (map.dimIn() != dims.b)
    throw InputError("applyToB: map acts on dimension " + std::to_string(map.dimIn()) + " but dimB = " +
                     std::to_string(dims.b));
  const auto da = static_cast<Eigen::Index>(dims.a);
  const auto db = static_cast<Eigen::Index>(dims.b);
  const auto dout = static_cast<Eigen::Index>(map.dimOut());
  ComplexMatrix out(da * dout, da * dout);
  for (Eigen::Index i = 0; i < da; ++i)
    for (Eigen::Index j = 0; j < da; ++j)
      out.block(i * dout, j * dout, dout, dout) = map(rho.block(i * db, j * db, db, db));
  return out;
}

inline ComplexMatrix applyToB(const LinearMap& map, const DensityMatrix& rho) {
  return applyToB(map, rho.mat(), rho.dims());
}

inline Witness witnessFromMap(const LinearMap& map) { return {map.choi(), {map.dimIn(), map.dimOut()}}; }

inline LinearMap mapFromWitness(const Witness& w) {
  return LinearMap(w.dims.a, w.dims.b, w.op, "from-witness");
}

/// Tr(W rho); negative values certify entanglement.
inline double witnessValue(const Witness& w, const DensityMatrix& rho) {
  if (!(w.dims == rho.dims()))
    throw InputError("witnessValue: witness dims " + std::to_string(w.dims.a) + "x" + std::to_string(w.dims.b) +
                     " do not match state dims " + std::to_string(rho.dimA()) + "x" + std::to_string(rho.dimB()));
  return expectation(w.op, rho.mat());
}

struct ProductPositivityCertificate {
  /// Smallest <a b|W|a b> found.
  double minValue = 0.0;
  ProductVector argmin;
  std::size_t probes = 0;
  bool positive = false;
};

/// Stochastic check that W is nonnegative on product vectors: Haar product
/// probes, then alternating minimization from the worst probe (fixing one
/// factor, the optimal other factor is the lowest eigenvector of the
/// partial expectation).
inline ProductPositivityCertificate certifyProductPositivity(const Witness& w, std::size_t probes, RngStream& rng) {
  const auto da = static_cast<Eigen::Index>(w.dims.a);
  const auto db = static_cast<Eigen::Index>(w.dims.b);
  auto value = [&](const ComplexVector& a, const ComplexVector& b) {
    const ComplexVector v = tensor(a, b);
    return v.dot(w.op * v).real();
  };
  ProductPositivityCertificate cert;
  cert.probes = probes;
  cert.minValue = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < probes; ++k) {
    ComplexVector a = randomPureVector(w.dims.a, rng);
    ComplexVector b = randomPureVector(w.dims.b, rng);
    const double val = value(a, b);
    if (val < cert.minValue) {
      cert.minValue = val;
      cert.argmin = {a, b};
    }
  }
  if (probes == 0) {
    cert.argmin = {randomPureVector(w.dims.a, rng), randomPureVector(w.dims.b, rng)};
    cert.minValue = value(cert.argmin.a, cert.argmin.b);
  }
  ComplexVector a = cert.argmin.a;
  ComplexVector b = cert.argmin.b;
  for (int iter = 0; iter < 200; ++iter) {
    // W_b = <b| W |b> as an operator on A
    ComplexMatrix wa = ComplexMatrix::Zero(da, da);
    for (Eigen::Index i = 0; i < da; ++i)
      for (Eigen::Index j = 0; j < da; ++j) wa(i, j) = b.dot(w.op.block(i * db, j * db, db, db) * b);
    a = hermitianEig((wa + wa.adjoint()) * 0.5).vector(w.dims.a - 1);
    ComplexMatrix wb = ComplexMatrix::Zero(db, db);
    for (Eigen::Index i = 0; i < da; ++i)
      for (Eigen::Index j = 0; j < da; ++j) wb += std::conj(a(i)) * a(j) * w.op.block(i * db, j * db, db, db);
    b = hermitianEig((wb + wb.adjoint()) * 0.5).vector(w.dims.b - 1);
    const double val = value(a, b);
    const double gain = cert.minValue - val;
    if (val < cert.minValue) {
      cert.minValue = val;
      cert.argmin = {a, b};
    }
    if (gain < 1e-14) break;
  }
  cert.positive = cert.minValue >= -tol::pos;
  return cert;
}

struct ChoiDetection {
  bool detected = false;
  /// Smallest eigenvalue of (I (x) Lambda_Choi) rho for the trace-one state.
  double minEig = 0.0;
  /// minEig * 21/2: the normalization under which sigma_alpha gives (3 - alpha)/2
  /// (the trace-one sigma_alpha gives (3 - alpha)/21).
  double scaledMinEig = 0.0;
};

inline ChoiDetection choiDetect(const DensityMatrix& rho) {
  if (rho.dimA() != 3 || rho.dimB() != 3) throw InputError("choiDetect: requires a 3x3 state");
  const ComplexMatrix op = applyToB(choiMap(), rho);
  ChoiDetection r;
  r.minEig = minEigenvalue(op);
  r.scaledMinEig = r.minEig * 21.0 / 2.0;
  r.detected = r.minEig < -tol::pos;
  return r;
}

}  // namespace entsep
