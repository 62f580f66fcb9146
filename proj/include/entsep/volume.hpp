#pragma once

// Monte Carlo volume of PPT states under the Hilbert-Schmidt measure, and the
// separable ball around the maximally mixed state.

#include <entsep/matcore.hpp>
#include <entsep/random.hpp>
#include <entsep/states.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

namespace entsep {

struct VolumeEstimate {
  Dims dims;
  std::size_t samples = 0;
  std::size_t pptCount = 0;
  double ratio = 0.0;
  double stderr = 0.0;
  std::string measure = "hilbert-schmidt";
  std::uint64_t seed = 0;
};

struct VolumeOptions {
  /// Samples per RNG stream; stream k draws chunk k whatever the worker count.
  std::size_t chunk = 1000;
  /// 0 picks std::thread::hardware_concurrency().
  std::size_t workers = 0;
};

inline bool isPpt(const DensityMatrix& rho) { return minEigenvalue(partialTranspose(rho)) >= -tol::pos; }

/// Fraction of HS-random states whose partial transpose is positive.
inline VolumeEstimate estimatePptRatio(std::size_t dA, std::size_t dB, std::size_t samples, const RngStream& rng,
                                       VolumeOptions opts = {}) {
  if (samples < 100) throw InputError("estimatePptRatio: need at least 100 samples");
  if (dA < 2 || dB < 2) throw InputError("estimatePptRatio: local dimensions must be >= 2");
  const std::size_t chunk = std::max<std::size_t>(opts.chunk, 1);
  const std::size_t chunks = (samples + chunk - 1) / chunk;
  std::vector<std::size_t> counts(chunks, 0);
  auto runChunk = [&](std::size_t c) {
    RngStream stream = rng.split(c);
    const std::size_t n = std::min(chunk, samples - c * chunk);
    std::size_t ppt = 0;
    for (std::size_t k = 0; k < n; ++k)
      if (isPpt(randomDensityMatrix(dA, dB, stream))) ++ppt;
    counts[c] = ppt;
  };
  std::size_t workers = opts.workers ? opts.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) runChunk(c);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t c = w; c < chunks; c += workers) runChunk(c);
      });
    for (auto& t : pool) t.join();
  }
  VolumeEstimate est;
  est.dims = {dA, dB};
  est.samples = samples;
  for (std::size_t c : counts) est.pptCount += c;
  est.ratio = static_cast<double>(est.pptCount) / static_cast<double>(samples);
  est.stderr = std::sqrt(est.ratio * (1.0 - est.ratio) / static_cast<double>(samples));
  est.seed = rng.seed();
  return est;
}

/// (1 - eps) I/N + eps rho.
inline DensityMatrix mixWithIdentity(const DensityMatrix& rho, double epsilon) {
  const auto n = static_cast<Eigen::Index>(rho.dim());
  const ComplexMatrix m =
      (1.0 - epsilon) * ComplexMatrix::Identity(n, n) / static_cast<double>(rho.dim()) + epsilon * rho.mat();
  return DensityMatrix(m, rho.dimA(), rho.dimB());
}

/// Largest eps with (1 - eps)/N - eps/2 >= 0, using that the partial
/// transpose of any pure state has eigenvalues >= -1/2.
inline double ptBallBound(std::size_t dA, std::size_t dB) { return 2.0 / (static_cast<double>(dA * dB) + 2.0); }

struct SeparableBallReport {
  Dims dims;
  double epsilon = 0.0;
  double bound = 0.0;
  std::size_t trials = 0;
  std::size_t nptCount = 0;
  /// Minimum PT eigenvalue over the sampled mixtures.
  double minPtEigenvalue = 0.0;
  /// Minimum PT eigenvalue of the mixture with a maximally entangled rho.
  double worstCaseMinPtEigenvalue = 0.0;
  /// For 2x2 and 2x3, PPT is equivalent to separability.
  bool certifiesSeparability = false;
};

inline SeparableBallReport separableBallCheck(std::size_t dA, std::size_t dB, double epsilon, std::size_t trials,
                                              RngStream& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InputError("separableBallCheck: epsilon must lie in [0, 1]");
  SeparableBallReport r;
  r.dims = {dA, dB};
  r.epsilon = epsilon;
  r.bound = ptBallBound(dA, dB);
  r.trials = trials;
  r.minPtEigenvalue = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < trials; ++k) {
    const double m = minEigenvalue(partialTranspose(mixWithIdentity(randomDensityMatrix(dA, dB, rng), epsilon)));
    r.minPtEigenvalue = std::min(r.minPtEigenvalue, m);
    if (m < -tol::pos) ++r.nptCount;
  }
  const std::size_t d = std::min(dA, dB);
  ComplexVector psi = ComplexVector::Zero(static_cast<Eigen::Index>(dA * dB));
  for (std::size_t i = 0; i < d; ++i) psi(static_cast<Eigen::Index>(i * dB + i)) = 1.0 / std::sqrt(double(d));
  r.worstCaseMinPtEigenvalue =
      minEigenvalue(partialTranspose(mixWithIdentity(DensityMatrix(projector(psi), dA, dB), epsilon)));
  const bool lowDim = std::min(dA, dB) == 2 && dA * dB <= 6;
  r.certifiesSeparability = lowDim && r.nptCount == 0;
  return r;
}

/// p0 = 1/(1 + 2/d)^(n-1) for n parties of dimension d.
inline double tarrachBound(std::size_t d, std::size_t parties) {
  return 1.0 / std::pow(1.0 + 2.0 / static_cast<double>(d), static_cast<double>(parties - 1));
}

struct TarrachComparison {
  double p0 = 0.0;
  double ptBound = 0.0;
  /// Min PT eigenvalue of (1 - p0) I/4 + p0 psi_-.
  double singletMinPtEigenvalue = 0.0;
  bool singletPptAtP0 = false;
};

/// Two qubits only; reported, not asserted.
inline TarrachComparison tarrachComparison() {
  TarrachComparison t;
  t.p0 = tarrachBound(2, 2);
  t.ptBound = ptBallBound(2, 2);
  t.singletMinPtEigenvalue = minEigenvalue(partialTranspose(mixWithIdentity(singletState(), t.p0)));
  t.singletPptAtP0 = t.singletMinPtEigenvalue >= -tol::pos;
  return t;
}

/// Min over Haar pure states (plus a maximally entangled one when
/// includeMaxEntangled) of the smallest PT eigenvalue.
inline double minPtEigenvalueOfPureStates(std::size_t dA, std::size_t dB, std::size_t trials, RngStream& rng,
                                          bool includeMaxEntangled = true) {
  double best = std::numeric_limits<double>::infinity();
  const Dims dims{dA, dB};
  for (std::size_t k = 0; k < trials; ++k)
    best = std::min(best, minEigenvalue(partialTranspose(projector(randomPureVector(dA * dB, rng)), dims)));
  if (includeMaxEntangled) {
    const std::size_t d = std::min(dA, dB);
    ComplexVector psi = ComplexVector::Zero(static_cast<Eigen::Index>(dA * dB));
    for (std::size_t i = 0; i < d; ++i) psi(static_cast<Eigen::Index>(i * dB + i)) = 1.0 / std::sqrt(double(d));
    best = std::min(best, minEigenvalue(partialTranspose(projector(psi), dims)));
  }
  return best;
}

}  // namespace entsep
