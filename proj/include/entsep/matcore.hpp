#pragma once

// Dense complex linear algebra for bipartite systems: Kronecker products,
// partial trace, partial transposition, a cyclic Jacobi eigensolver for
// Hermitian matrices, and positivity tests with explicit tolerances.
//
// Composite index convention: n = i * dimB + mu (A-major), so a state on
// A (x) B is an m x m grid of dimB x dimB blocks.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace entsep {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;

namespace tol {
inline constexpr double herm = 1e-10;
inline constexpr double trace = 1e-10;
inline constexpr double norm = 1e-10;
inline constexpr double pos = 1e-9;
inline constexpr double eig = 1e-12;
/// Relative numerical-rank cutoff (times the largest eigenvalue).
inline constexpr double rank = 1e-8;
/// Slack for entropic inequalities.
inline constexpr double ent = 1e-9;
}  // namespace tol

/// Malformed input: wrong dimensions, out-of-range parameters, broken invariants.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A well-formed input that does not meet a domain precondition
/// (e.g. asking to distill a PPT state).
class PreconditionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Subsystem { A, B };

struct Dims {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t total() const { return a * b; }
  friend bool operator==(const Dims&, const Dims&) = default;
};

namespace detail {

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1e", v);
  return buf;
}

inline double maxAbs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermiticityDrift(const ComplexMatrix& m) {
  return maxAbs(m - m.adjoint());
}

inline void requireSquare(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols())
    throw InputError(std::string(what) + ": matrix is " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + ", expected square");
}

inline void requireDims(const ComplexMatrix& m, Dims d, const char* what) {
  requireSquare(m, what);
  if (d.a == 0 || d.b == 0 || static_cast<std::size_t>(m.rows()) != d.total())
    throw InputError(std::string(what) + ": dimension mismatch, matrix is " +
                     std::to_string(m.rows()) + " but dimA*dimB = " + std::to_string(d.a) +
                     "*" + std::to_string(d.b));
}

inline void requireFinite(const ComplexMatrix& m, const char* what) {
  if (!m.allFinite()) throw InputError(std::string(what) + ": non-finite entry");
}

}  // namespace detail

/// Eigen-decomposition of a Hermitian matrix. Eigenvalues descending,
/// eigenvectors stored as the matching columns.
struct Spectrum {
  std::vector<double> eigenvalues;
  ComplexMatrix eigenvectors;

  double min() const { return eigenvalues.back(); }
  double max() const { return eigenvalues.front(); }
  ComplexVector vector(std::size_t i) const { return eigenvectors.col(static_cast<Eigen::Index>(i)); }
};

/// Cyclic Jacobi eigensolver for complex Hermitian matrices.
///
/// Each rotation first removes the phase of the pivot a_pq and then applies
/// the classical real symmetric Jacobi rotation. Input is symmetrized via
/// (M + M^dagger)/2 after checking that the drift is within tol::herm.
inline Spectrum hermitianEig(const ComplexMatrix& m) {
  detail::requireSquare(m, "hermitianEig");
  detail::requireFinite(m, "hermitianEig");
  const double drift = detail::hermiticityDrift(m);
  if (drift > tol::herm)
    throw InputError("hermitianEig: hermiticity drift " + detail::sci(drift) + " > tau_herm");

  const Eigen::Index n = m.rows();
  ComplexMatrix a = (m + m.adjoint()) * 0.5;
  ComplexMatrix v = ComplexMatrix::Identity(n, n);

  const double scale = std::max(detail::maxAbs(a), 1e-300);
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += std::norm(a(p, q));
    if (std::sqrt(off) <= 1e-17 * scale * static_cast<double>(n)) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double b = std::abs(a(p, q));
        if (b <= 1e-300 || b <= 1e-18 * scale) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const Complex phase = a(p, q) / b;  // a_pq = b e^{i phi}
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * b);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // G = diag(1, conj(phase)) * [[c, s], [-s, c]] restricted to (p, q)
        const Complex gpp = c;
        const Complex gpq = s;
        const Complex gqp = -s * std::conj(phase);
        const Complex gqq = c * std::conj(phase);

        // A <- A G (columns p, q)
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex akp = a(k, p);
          const Complex akq = a(k, q);
          a(k, p) = akp * gpp + akq * gqp;
          a(k, q) = akp * gpq + akq * gqq;
        }
        // A <- G^dagger A (rows p, q)
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex apk = a(p, k);
          const Complex aqk = a(q, k);
          a(p, k) = std::conj(gpp) * apk + std::conj(gqp) * aqk;
          a(q, k) = std::conj(gpq) * apk + std::conj(gqq) * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex vkp = v(k, p);
          const Complex vkq = v(k, q);
          v(k, p) = vkp * gpp + vkq * gqp;
          v(k, q) = vkp * gpq + vkq * gqq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i).real() > a(j, j).real(); });

  Spectrum out;
  out.eigenvalues.reserve(static_cast<std::size_t>(n));
  out.eigenvectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.eigenvalues.push_back(a(src, src).real());
    out.eigenvectors.col(k) = v.col(src);
  }
  return out;
}

inline double minEigenvalue(const ComplexMatrix& m) { return hermitianEig(m).min(); }

/// true iff the smallest eigenvalue is >= -tolerance.
inline bool isPositive(const ComplexMatrix& m, double tolerance = tol::pos) {
  return minEigenvalue(m) >= -tolerance;
}

/// Reporting-level positivity: Marginal when the smallest eigenvalue sits
/// within +-tolerance of zero.
enum class Positivity { Positive, Marginal, Negative };

inline Positivity positivityOf(double minEig, double tolerance = tol::pos) {
  if (minEig > tolerance) return Positivity::Positive;
  if (minEig < -tolerance) return Positivity::Negative;
  return Positivity::Marginal;
}

/// Numerical rank with cutoff tol::rank * largest eigenvalue.
inline std::size_t numericalRank(const std::vector<double>& eigenvalues) {
  if (eigenvalues.empty()) return 0;
  const double top = *std::max_element(eigenvalues.begin(), eigenvalues.end());
  if (top <= 0.0) return 0;
  return static_cast<std::size_t>(std::count_if(eigenvalues.begin(), eigenvalues.end(),
                                                [&](double x) { return x > tol::rank * top; }));
}

inline ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline ComplexVector tensor(const ComplexVector& a, const ComplexVector& b) {
  ComplexVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

/// Column vector |i>|j> of the product basis.
inline ComplexVector basisKet(Dims d, std::size_t i, std::size_t j) {
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(d.total()));
  v(static_cast<Eigen::Index>(i * d.b + j)) = 1.0;
  return v;
}

inline ComplexMatrix projector(const ComplexVector& v) { return v * v.adjoint(); }

inline ComplexMatrix partialTranspose(const ComplexMatrix& m, Dims d, Subsystem which = Subsystem::B) {
  detail::requireDims(m, d, "partialTranspose");
  ComplexMatrix out(m.rows(), m.cols());
  const auto db = static_cast<Eigen::Index>(d.b);
  const auto da = static_cast<Eigen::Index>(d.a);
  for (Eigen::Index i = 0; i < da; ++i)
    for (Eigen::Index j = 0; j < da; ++j)
      for (Eigen::Index mu = 0; mu < db; ++mu)
        for (Eigen::Index nu = 0; nu < db; ++nu) {
          if (which == Subsystem::B)
            out(i * db + mu, j * db + nu) = m(i * db + nu, j * db + mu);
          else
            out(i * db + mu, j * db + nu) = m(j * db + mu, i * db + nu);
        }
  return out;
}

/// Trace out `which`; the result lives on the other factor.
inline ComplexMatrix partialTrace(const ComplexMatrix& m, Dims d, Subsystem which) {
  detail::requireDims(m, d, "partialTrace");
  const auto da = static_cast<Eigen::Index>(d.a);
  const auto db = static_cast<Eigen::Index>(d.b);
  if (which == Subsystem::B) {
    ComplexMatrix out = ComplexMatrix::Zero(da, da);
    for (Eigen::Index i = 0; i < da; ++i)
      for (Eigen::Index j = 0; j < da; ++j)
        for (Eigen::Index mu = 0; mu < db; ++mu) out(i, j) += m(i * db + mu, j * db + mu);
    return out;
  }
  ComplexMatrix out = ComplexMatrix::Zero(db, db);
  for (Eigen::Index mu = 0; mu < db; ++mu)
    for (Eigen::Index nu = 0; nu < db; ++nu)
      for (Eigen::Index i = 0; i < da; ++i) out(mu, nu) += m(i * db + mu, i * db + nu);
  return out;
}

/// Trace-one positive Hermitian matrix labelled with its bipartition.
///
/// Construction validates the invariants and symmetrizes small Hermiticity
/// drift; anything beyond the tolerances throws InputError naming the
/// violated invariant and its numeric slack.
class DensityMatrix {
 public:
  DensityMatrix(ComplexMatrix m, std::size_t dimA, std::size_t dimB) : dims_{dimA, dimB} {
    detail::requireDims(m, dims_, "DensityMatrix");
    detail::requireFinite(m, "DensityMatrix");
    const double drift = detail::hermiticityDrift(m);
    if (drift > tol::herm)
      throw InputError("hermiticity drift " + detail::sci(drift) + " > tau_herm");
    mat_ = (m + m.adjoint()) * 0.5;
    const double dev = std::abs(mat_.trace().real() - 1.0);
    if (dev > tol::trace) throw InputError("trace deviation " + detail::sci(dev) + " > tau_trace");
    const double lo = minEigenvalue(mat_);
    if (lo < -tol::pos)
      throw InputError("negative eigenvalue " + detail::sci(lo) + " < -tau_pos");
  }

  /// Normalizes a positive operator by its trace first.
  static DensityMatrix normalized(const ComplexMatrix& m, std::size_t dimA, std::size_t dimB) {
    const double tr = m.trace().real();
    if (!(tr > 1e-300)) throw NumericalError("cannot normalize an operator with trace " + detail::sci(tr));
    return DensityMatrix(m / tr, dimA, dimB);
  }

  const ComplexMatrix& mat() const { return mat_; }
  std::size_t dimA() const { return dims_.a; }
  std::size_t dimB() const { return dims_.b; }
  Dims dims() const { return dims_; }
  std::size_t dim() const { return dims_.total(); }

 private:
  ComplexMatrix mat_;
  Dims dims_;
};

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  // Factors are treated as single systems: (a on A) (x) (b on B).
  return DensityMatrix(tensor(a.mat(), b.mat()), a.dim(), b.dim());
}

inline DensityMatrix partialTrace(const DensityMatrix& rho, Subsystem which) {
  ComplexMatrix r = partialTrace(rho.mat(), rho.dims(), which);
  const auto n = static_cast<std::size_t>(r.rows());
  return DensityMatrix(std::move(r), n, 1);
}

inline ComplexMatrix partialTranspose(const DensityMatrix& rho, Subsystem which = Subsystem::B) {
  return partialTranspose(rho.mat(), rho.dims(), which);
}

/// <psi|rho|psi>. Raw value may leave [0,1] by tol::pos; use clamp01 for reporting.
inline double fidelityWith(const DensityMatrix& rho, const ComplexVector& psi) {
  if (static_cast<std::size_t>(psi.size()) != rho.dim())
    throw InputError("fidelityWith: vector length " + std::to_string(psi.size()) +
                     " does not match state dimension " + std::to_string(rho.dim()));
  const double dev = std::abs(psi.norm() - 1.0);
  if (dev > tol::norm) throw InputError("fidelityWith: norm deviation " + detail::sci(dev) + " > tau_norm");
  return psi.dot(rho.mat() * psi).real();
}

inline double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

/// Conjugation U rho U^dagger.
inline ComplexMatrix conjugate(const ComplexMatrix& rho, const ComplexMatrix& u) { return u * rho * u.adjoint(); }

inline double expectation(const ComplexMatrix& op, const ComplexMatrix& rho) { return (op * rho).trace().real(); }

}  // namespace entsep
