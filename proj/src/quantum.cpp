#include "seqchan/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seqchan/error.hpp"

namespace seqchan {

namespace {

constexpr double kStateTolerance = 1e-9;
constexpr double kChannelTolerance = 1e-8;

void requireHermitianPsdUnitTrace(const ComplexMatrix& m, std::string_view what) {
  if (!m.isSquare() || m.rows() == 0)
    throw Error(ErrorCode::InvalidState, std::string(what) + " must be a non-empty square matrix");
  if (!m.allFinite()) throw Error(ErrorCode::InvalidState, std::string(what) + " has non-finite entries");
  if ((m - m.adjoint()).frobeniusNorm() > kStateTolerance)
    throw Error(ErrorCode::InvalidState, std::string(what) + " is not Hermitian");
  if (std::abs(m.trace() - 1.0) > kStateTolerance)
    throw Error(ErrorCode::InvalidState, std::string(what) + " does not have unit trace");
  const auto eig = hermitianEigen(m);
  if (eig.eigenvalues.front() < -kPsdTolerance)
    throw Error(ErrorCode::InvalidState, std::string(what) + " has a negative eigenvalue");
}

}  // namespace

DensityMatrix::DensityMatrix(ComplexMatrix mat, std::optional<std::string> label)
    : mat_(std::move(mat)), label_(std::move(label)) {
  requireHermitianPsdUnitTrace(mat_, "density matrix");
  mat_ = mat_.hermitianPart();
}

DensityMatrix DensityMatrix::pure(std::span<const Complex> psi) {
  const double n = norm(psi);
  if (n == 0.0) throw Error(ErrorCode::InvalidState, "zero vector");
  ComplexVector unit(psi.begin(), psi.end());
  for (auto& z : unit) z /= n;
  return DensityMatrix(ComplexMatrix::outer(unit));
}

DensityMatrix DensityMatrix::maximallyMixed(std::size_t dim) {
  return DensityMatrix(Complex{1.0 / static_cast<double>(dim), 0.0} * ComplexMatrix::identity(dim));
}

QuantumChannel::QuantumChannel(std::vector<ComplexMatrix> kraus, std::optional<std::string> label)
    : kraus_(std::move(kraus)), label_(std::move(label)) {
  if (kraus_.empty()) throw Error(ErrorCode::InvalidChannel, "empty Kraus list");
  outDim_ = kraus_.front().rows();
  inDim_ = kraus_.front().cols();
  if (inDim_ == 0 || outDim_ == 0) throw Error(ErrorCode::InvalidChannel, "zero dimension");
  ComplexMatrix sum(inDim_, inDim_);
  for (const auto& k : kraus_) {
    if (k.rows() != outDim_ || k.cols() != inDim_)
      throw Error(ErrorCode::InvalidChannel, "Kraus operators have inconsistent shapes");
    if (!k.allFinite()) throw Error(ErrorCode::InvalidChannel, "non-finite Kraus entry");
    sum += k.adjoint() * k;
  }
  if ((sum - ComplexMatrix::identity(inDim_)).frobeniusNorm() > kChannelTolerance)
    throw Error(ErrorCode::InvalidChannel, "Kraus operators are not trace preserving");
  choi_ = choiFromKraus(*this);
}

Povm::Povm(std::vector<ComplexMatrix> effects) : effects_(std::move(effects)) {
  if (effects_.empty()) throw Error(ErrorCode::InvalidPovm, "no effects");
  dim_ = effects_.front().rows();
  ComplexMatrix sum(dim_, dim_);
  isPvm_ = true;
  for (auto& e : effects_) {
    if (!e.isSquare() || e.rows() != dim_)
      throw Error(ErrorCode::InvalidPovm, "effects have inconsistent shapes");
    if ((e - e.adjoint()).frobeniusNorm() > kStateTolerance)
      throw Error(ErrorCode::InvalidPovm, "effect is not Hermitian");
    e = e.hermitianPart();
    if (hermitianEigen(e).eigenvalues.front() < -kPsdTolerance)
      throw Error(ErrorCode::InvalidPovm, "effect is not PSD");
    if ((e * e - e).frobeniusNorm() > kChannelTolerance) isPvm_ = false;
    sum += e;
  }
  if ((sum - ComplexMatrix::identity(dim_)).frobeniusNorm() > kChannelTolerance)
    throw Error(ErrorCode::InvalidPovm, "effects do not sum to the identity");
}

Povm Povm::fromBasis(const ComplexMatrix& unitary) {
  std::vector<ComplexMatrix> effects;
  const std::size_t d = unitary.rows();
  effects.reserve(unitary.cols());
  ComplexVector col(d);
  for (std::size_t k = 0; k < unitary.cols(); ++k) {
    for (std::size_t r = 0; r < d; ++r) col[r] = unitary(r, k);
    effects.push_back(ComplexMatrix::outer(col));
  }
  return Povm(std::move(effects));
}

namespace {

// Sum_K (I_R (x) K) M (I_R (x) K)^dagger for a square M on R (x) A, blockwise.
ComplexMatrix applyKrausBlocks(const std::vector<ComplexMatrix>& kraus, const ComplexMatrix& m,
                               std::size_t ancillaDim, std::size_t inDim, std::size_t outDim) {
  const std::size_t outTotal = ancillaDim * outDim;
  ComplexMatrix out(outTotal, outTotal);
  ComplexMatrix block(inDim, inDim);
  for (std::size_t r = 0; r < ancillaDim; ++r) {
    for (std::size_t s = 0; s < ancillaDim; ++s) {
      for (std::size_t a = 0; a < inDim; ++a)
        for (std::size_t b = 0; b < inDim; ++b) block(a, b) = m(r * inDim + a, s * inDim + b);
      for (const auto& k : kraus) {
        const ComplexMatrix kb = k * block * k.adjoint();
        for (std::size_t a = 0; a < outDim; ++a)
          for (std::size_t b = 0; b < outDim; ++b) out(r * outDim + a, s * outDim + b) += kb(a, b);
      }
    }
  }
  return out;
}

}  // namespace

DensityMatrix applyChannel(const QuantumChannel& ch, const DensityMatrix& state,
                           std::size_t ancillaDim) {
  if (ancillaDim == 0 || state.dim() != ancillaDim * ch.inDim())
    throw Error(ErrorCode::DimensionMismatch, "applyChannel: state dimension != ancillaDim*inDim");
  ComplexMatrix out =
      applyKrausBlocks(ch.kraus(), state.matrix(), ancillaDim, ch.inDim(), ch.outDim());
  return DensityMatrix(out.hermitianPart(), state.label());
}

ComplexMatrix applyChannelPure(const QuantumChannel& ch, std::span<const Complex> psi,
                               std::size_t ancillaDim) {
  const std::size_t dA = ch.inDim();
  const std::size_t dB = ch.outDim();
  if (psi.size() != ancillaDim * dA)
    throw Error(ErrorCode::DimensionMismatch, "applyChannelPure: vector dimension");
  const std::size_t total = ancillaDim * dB;
  ComplexMatrix out(total, total);
  ComplexVector phi(total);
  for (const auto& k : ch.kraus()) {
    // phi = (I (x) K) psi, i.e. phi[r, b] = sum_a K[b, a] psi[r, a].
    for (std::size_t r = 0; r < ancillaDim; ++r)
      for (std::size_t b = 0; b < dB; ++b) {
        Complex s{0.0, 0.0};
        for (std::size_t a = 0; a < dA; ++a) s += k(b, a) * psi[r * dA + a];
        phi[r * dB + b] = s;
      }
    for (std::size_t i = 0; i < total; ++i) {
      if (phi[i] == Complex{0.0, 0.0}) continue;
      for (std::size_t j = 0; j < total; ++j) out(i, j) += phi[i] * std::conj(phi[j]);
    }
  }
  return out;
}

ComplexMatrix applyAdjointChannel(const QuantumChannel& ch, const ComplexMatrix& x,
                                  std::size_t ancillaDim) {
  if (!x.isSquare() || x.rows() != ancillaDim * ch.outDim())
    throw Error(ErrorCode::DimensionMismatch, "applyAdjointChannel: operator dimension");
  std::vector<ComplexMatrix> adj;
  adj.reserve(ch.kraus().size());
  for (const auto& k : ch.kraus()) adj.push_back(k.adjoint());
  return applyKrausBlocks(adj, x, ancillaDim, ch.outDim(), ch.inDim());
}

ComplexVector maximallyEntangled(std::size_t d) {
  ComplexVector v(d * d);
  const double amp = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t i = 0; i < d; ++i) v[i * d + i] = amp;
  return v;
}

ComplexMatrix choiFromKraus(const QuantumChannel& ch) {
  return applyChannelPure(ch, maximallyEntangled(ch.inDim()), ch.inDim()).hermitianPart();
}

ComplexMatrix choiByActionOnUnits(const QuantumChannel& ch) {
  const std::size_t dA = ch.inDim();
  const std::size_t dB = ch.outDim();
  ComplexMatrix j(dA * dB, dA * dB);
  for (std::size_t i = 0; i < dA; ++i)
    for (std::size_t k = 0; k < dA; ++k) {
      ComplexMatrix unit(dA, dA);
      unit(i, k) = 1.0;
      ComplexMatrix image(dB, dB);
      for (const auto& kr : ch.kraus()) image += kr * unit * kr.adjoint();
      for (std::size_t b = 0; b < dB; ++b)
        for (std::size_t c = 0; c < dB; ++c)
          j(i * dB + b, k * dB + c) = image(b, c) / static_cast<double>(dA);
    }
  return j;
}

QuantumChannel tensorPowerChannel(const QuantumChannel& ch, std::size_t l,
                                  std::size_t dimensionCap) {
  if (l == 0) throw Error(ErrorCode::InvalidArgument, "tensor power needs l >= 1");
  double inTotal = 1.0, outTotal = 1.0;
  for (std::size_t i = 0; i < l; ++i) {
    inTotal *= static_cast<double>(ch.inDim());
    outTotal *= static_cast<double>(ch.outDim());
  }
  if (inTotal * outTotal > static_cast<double>(dimensionCap) ||
      std::pow(static_cast<double>(ch.kraus().size()), static_cast<double>(l)) > 1e6)
    throw Error(ErrorCode::DimensionOverflow, "tensor power exceeds the dimension cap");
  if (l == 1) return ch;
  std::vector<ComplexMatrix> kraus = ch.kraus();
  for (std::size_t step = 1; step < l; ++step) {
    std::vector<ComplexMatrix> next;
    next.reserve(kraus.size() * ch.kraus().size());
    for (const auto& a : kraus)
      for (const auto& b : ch.kraus()) next.push_back(kron(a, b, dimensionCap));
    kraus = std::move(next);
  }
  std::optional<std::string> label;
  if (ch.label()) label = *ch.label() + "^" + std::to_string(l);
  return QuantumChannel(std::move(kraus), std::move(label));
}

RealVector outcomeDistribution(const DensityMatrix& state, const Povm& m) {
  if (m.dim() != state.dim()) throw Error(ErrorCode::DimensionMismatch, "POVM dimension");
  RealVector p(m.outcomeCount());
  for (std::size_t y = 0; y < p.size(); ++y)
    p[y] = std::clamp(traceProduct(state.matrix(), m.effects()[y]).real(), 0.0, 1.0);
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-8)
    throw Error(ErrorCode::NormalizationFailure, "outcome probabilities do not sum to one");
  for (auto& v : p) v /= total;
  return p;
}

RealVector outcomeDistribution(const QuantumChannel& ch, const DensityMatrix& state,
                               std::size_t ancillaDim, const Povm& m) {
  if (m.dim() != ancillaDim * ch.outDim())
    throw Error(ErrorCode::DimensionMismatch, "POVM dimension != ancillaDim*outDim");
  return outcomeDistribution(applyChannel(ch, state, ancillaDim), m);
}

namespace {

DirectionReport dominance(const ComplexMatrix& j0, const HermitianEig& eig1) {
  DirectionReport report;
  // supp(J0) within supp(J1) iff J0 has no weight on ker(J1).
  RealVector kernelMask(eig1.eigenvalues.size());
  RealVector invSqrt(eig1.eigenvalues.size());
  for (std::size_t k = 0; k < kernelMask.size(); ++k) {
    const bool inSupport = eig1.eigenvalues[k] > kPsdTolerance;
    kernelMask[k] = inSupport ? 0.0 : 1.0;
    invSqrt[k] = inSupport ? 1.0 / std::sqrt(eig1.eigenvalues[k]) : 0.0;
  }
  const ComplexMatrix kernel = reconstruct(eig1, kernelMask);
  const double leak = traceProduct(kernel, j0).real();
  report.supportIncluded = leak <= kPsdTolerance;
  if (report.supportIncluded) {
    const ComplexMatrix w = reconstruct(eig1, invSqrt);
    const auto ratio = hermitianEigen((w * j0 * w).hermitianPart());
    report.maxDivergence = std::max(0.0, std::log(ratio.eigenvalues.back()));
  }
  return report;
}

}  // namespace

FinitenessReport validateChannelPair(const QuantumChannel& n0, const QuantumChannel& n1) {
  if (n0.inDim() != n1.inDim() || n0.outDim() != n1.outDim())
    throw Error(ErrorCode::DimensionMismatch, "channels have different dimensions");
  const auto e0 = hermitianEigen(n0.choi());
  const auto e1 = hermitianEigen(n1.choi());
  return FinitenessReport{dominance(n0.choi(), e1), dominance(n1.choi(), e0)};
}

namespace zoo {

QuantumChannel identity(std::size_t dim) {
  return QuantumChannel({ComplexMatrix::identity(dim)}, "identity");
}

QuantumChannel depolarizing(double p, std::size_t dim) {
  if (p < 0.0 || p > 1.0) throw Error(ErrorCode::InvalidArgument, "depolarizing p outside [0,1]");
  // (1-p) rho + p I/d = (1-p) rho + (p/d) sum_{ij} E_ij rho E_ij^dagger
  std::vector<ComplexMatrix> kraus;
  kraus.push_back(Complex{std::sqrt(1.0 - p), 0.0} * ComplexMatrix::identity(dim));
  const double w = std::sqrt(p / static_cast<double>(dim));
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) {
      ComplexMatrix e(dim, dim);
      e(i, j) = w;
      kraus.push_back(std::move(e));
    }
  if (p == 0.0) kraus.resize(1);
  if (p == 1.0) kraus.erase(kraus.begin());
  return QuantumChannel(std::move(kraus), "depolarizing");
}

QuantumChannel amplitudeDamping(double gamma) {
  if (gamma < 0.0 || gamma > 1.0)
    throw Error(ErrorCode::InvalidArgument, "amplitude damping gamma outside [0,1]");
  ComplexMatrix k0(2, 2), k1(2, 2);
  k0(0, 0) = 1.0;
  k0(1, 1) = std::sqrt(1.0 - gamma);
  k1(0, 1) = std::sqrt(gamma);
  return QuantumChannel({k0, k1}, "amplitude_damping");
}

QuantumChannel dephasing(double p) {
  if (p < 0.0 || p > 1.0) throw Error(ErrorCode::InvalidArgument, "dephasing p outside [0,1]");
  ComplexMatrix k0 = Complex{std::sqrt(1.0 - p), 0.0} * ComplexMatrix::identity(2);
  ComplexMatrix k1(2, 2);
  k1(0, 0) = std::sqrt(p);
  k1(1, 1) = -std::sqrt(p);
  return QuantumChannel({k0, k1}, "dephasing");
}

QuantumChannel replacer(const DensityMatrix& sigma, std::size_t inDim) {
  // K_{b,a} = sqrt(s_b) |v_b><a| over the eigenpairs of sigma.
  const auto eig = hermitianEigen(sigma.matrix());
  const std::size_t dB = sigma.dim();
  std::vector<ComplexMatrix> kraus;
  for (std::size_t b = 0; b < dB; ++b) {
    const double s = eig.eigenvalues[b];
    if (s <= 0.0) continue;
    for (std::size_t a = 0; a < inDim; ++a) {
      ComplexMatrix k(dB, inDim);
      for (std::size_t r = 0; r < dB; ++r) k(r, a) = std::sqrt(s) * eig.eigenvectors(r, b);
      kraus.push_back(std::move(k));
    }
  }
  return QuantumChannel(std::move(kraus), "replacer");
}

QuantumChannel classical(const std::vector<RealVector>& stochastic) {
  if (stochastic.empty()) throw Error(ErrorCode::InvalidArgument, "empty stochastic matrix");
  const std::size_t dOut = stochastic.size();
  const std::size_t dIn = stochastic.front().size();
  std::vector<ComplexMatrix> kraus;
  for (std::size_t y = 0; y < dOut; ++y) {
    if (stochastic[y].size() != dIn)
      throw Error(ErrorCode::InvalidArgument, "ragged stochastic matrix");
    for (std::size_t x = 0; x < dIn; ++x) {
      const double w = stochastic[y][x];
      if (w < 0.0) throw Error(ErrorCode::InvalidArgument, "negative transition probability");
      if (w == 0.0) continue;
      ComplexMatrix k(dOut, dIn);
      k(y, x) = std::sqrt(w);
      kraus.push_back(std::move(k));
    }
  }
  return QuantumChannel(std::move(kraus), "classical");
}

}  // namespace zoo

namespace random {

ComplexMatrix ginibre(std::size_t rows, std::size_t cols, Engine& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix g(rows, cols);
  for (auto& z : g.data()) {
    const double re = normal(rng);
    const double im = normal(rng);
    z = Complex{re, im};
  }
  return g;
}

ComplexMatrix haarIsometry(std::size_t rows, std::size_t cols, Engine& rng) {
  if (rows < cols) throw Error(ErrorCode::InvalidArgument, "isometry needs rows >= cols");
  ComplexMatrix q = ginibre(rows, cols, rng);
  // Modified Gram-Schmidt; positive diagonal of R makes Q Haar distributed.
  for (std::size_t k = 0; k < cols; ++k) {
    for (std::size_t j = 0; j < k; ++j) {
      Complex proj{0.0, 0.0};
      for (std::size_t r = 0; r < rows; ++r) proj += std::conj(q(r, j)) * q(r, k);
      for (std::size_t r = 0; r < rows; ++r) q(r, k) -= proj * q(r, j);
    }
    double n = 0.0;
    for (std::size_t r = 0; r < rows; ++r) n += std::norm(q(r, k));
    n = std::sqrt(n);
    for (std::size_t r = 0; r < rows; ++r) q(r, k) /= n;
  }
  return q;
}

ComplexMatrix haarUnitary(std::size_t dim, Engine& rng) { return haarIsometry(dim, dim, rng); }

ComplexVector pureState(std::size_t dim, Engine& rng) {
  const ComplexMatrix g = ginibre(dim, 1, rng);
  ComplexVector v(g.data().begin(), g.data().end());
  const double n = norm(v);
  for (auto& z : v) z /= n;
  return v;
}

DensityMatrix densityMatrix(std::size_t dim, Engine& rng) {
  const ComplexMatrix g = ginibre(dim, dim, rng);
  ComplexMatrix rho = g * g.adjoint();
  rho *= Complex{1.0 / rho.trace().real(), 0.0};
  return DensityMatrix(rho.hermitianPart());
}

QuantumChannel channel(std::size_t inDim, std::size_t outDim, Engine& rng, std::size_t envDim) {
  if (envDim == 0) envDim = inDim * outDim;
  const ComplexMatrix v = haarIsometry(outDim * envDim, inDim, rng);
  std::vector<ComplexMatrix> kraus;
  kraus.reserve(envDim);
  // Output index b and environment index e are packed as b*envDim + e.
  for (std::size_t e = 0; e < envDim; ++e) {
    ComplexMatrix k(outDim, inDim);
    for (std::size_t b = 0; b < outDim; ++b)
      for (std::size_t a = 0; a < inDim; ++a) k(b, a) = v(b * envDim + e, a);
    kraus.push_back(std::move(k));
  }
  return QuantumChannel(std::move(kraus), "random");
}

Povm rankOnePvm(std::size_t dim, Engine& rng) { return Povm::fromBasis(haarUnitary(dim, rng)); }

}  // namespace random

}  // namespace seqchan
