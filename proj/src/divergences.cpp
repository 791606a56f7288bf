#include "seqchan/divergences.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seqchan/error.hpp"
#include "seqchan/optimize.hpp"

namespace seqchan {

std::string kindName(const DivergenceSpec& spec) {
  switch (spec.kind) {
    case DivergenceKind::RelativeEntropy: return "relEntropy";
    case DivergenceKind::Measured: return "measured";
    case DivergenceKind::MaxDivergence: return "maxDiv";
    case DivergenceKind::SandwichedRenyi: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "sandwichedRenyi(%g)", spec.alpha);
      return buf;
    }
  }
  return "unknown";
}

DivergenceSpec parseKind(std::string_view name, double alpha) {
  if (name == "relEntropy") return DivergenceSpec::relEntropy();
  if (name == "measured") return DivergenceSpec::measured();
  if (name == "maxDiv") return DivergenceSpec::maxDiv();
  if (name == "sandwichedRenyi") {
    if (!(alpha > 1.0)) throw Error(ErrorCode::InvalidAlpha, "sandwiched Renyi needs alpha > 1");
    return DivergenceSpec::sandwiched(alpha);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown divergence kind '" + std::string(name) + "'");
}

bool supportIncluded(const ComplexMatrix& rho, const ComplexMatrix& sigma, double tol) {
  const auto eig = hermitianEigen(sigma);
  RealVector kernelMask(eig.eigenvalues.size());
  for (std::size_t k = 0; k < kernelMask.size(); ++k)
    kernelMask[k] = eig.eigenvalues[k] > tol ? 0.0 : 1.0;
  return traceProduct(reconstruct(eig, kernelMask), rho).real() <= kPsdTolerance;
}

double klDivergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error(ErrorCode::DimensionMismatch, "klDivergence");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return kInfinity;
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(kl, 0.0);
}

double renyiDivergence(std::span<const double> p, std::span<const double> q, double alpha) {
  if (!(alpha > 1.0)) throw Error(ErrorCode::InvalidAlpha, "renyiDivergence needs alpha > 1");
  if (p.size() != q.size()) throw Error(ErrorCode::DimensionMismatch, "renyiDivergence");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return kInfinity;
    s += std::pow(p[i], alpha) * std::pow(q[i], 1.0 - alpha);
  }
  return std::max(std::log(s) / (alpha - 1.0), 0.0);
}

namespace detail {

double relEntropy(const ComplexMatrix& rho, const ComplexMatrix& sigma, double supportTol) {
  if (!supportIncluded(rho, sigma, supportTol)) return kInfinity;
  const auto er = hermitianEigen(rho);
  double entropyTerm = 0.0;
  for (double l : er.eigenvalues)
    if (l > 0.0) entropyTerm += l * std::log(l);
  const ComplexMatrix logSigma = matrixFunction(sigma, SpectralFunction::Log, true, 1.0, supportTol);
  const double d = entropyTerm - traceProduct(rho, logSigma).real();
  return std::max(d, 0.0);
}

double sandwichedRenyi(const ComplexMatrix& rho, const ComplexMatrix& sigma, double alpha,
                       double supportTol) {
  if (!(alpha > 1.0)) throw Error(ErrorCode::InvalidAlpha, "sandwiched Renyi needs alpha > 1");
  if (!supportIncluded(rho, sigma, supportTol)) return kInfinity;
  const double beta = (1.0 - alpha) / (2.0 * alpha);
  const ComplexMatrix w = matrixFunction(sigma, SpectralFunction::Power, true, beta, supportTol);
  const auto eig = hermitianEigen((w * rho * w).hermitianPart());
  double s = 0.0;
  for (double l : eig.eigenvalues)
    if (l > 0.0) s += std::pow(l, alpha);
  return std::max(std::log(s) / (alpha - 1.0), 0.0);
}

double maxDivergence(const ComplexMatrix& rho, const ComplexMatrix& sigma, double supportTol) {
  if (!supportIncluded(rho, sigma, supportTol)) return kInfinity;
  const ComplexMatrix w = matrixFunction(sigma, SpectralFunction::InverseSqrt, true, 1.0, supportTol);
  const auto eig = hermitianEigen((w * rho * w).hermitianPart());
  return std::max(std::log(eig.eigenvalues.back()), 0.0);
}

}  // namespace detail

namespace {

void requireSameDim(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::InvalidState, "states have different dimensions");
}

DivergenceValue exact(double v) {
  DivergenceValue out;
  out.value = v;
  out.isFinite = std::isfinite(v);
  return out;
}

}  // namespace

DivergenceValue relEntropyStates(const DensityMatrix& rho0, const DensityMatrix& rho1) {
  requireSameDim(rho0, rho1);
  return exact(detail::relEntropy(rho0.matrix(), rho1.matrix()));
}

DivergenceValue maxDivStates(const DensityMatrix& rho0, const DensityMatrix& rho1) {
  requireSameDim(rho0, rho1);
  return exact(detail::maxDivergence(rho0.matrix(), rho1.matrix()));
}

DivergenceValue sandwichedRenyiStates(const DensityMatrix& rho0, const DensityMatrix& rho1,
                                      double alpha) {
  requireSameDim(rho0, rho1);
  return exact(detail::sandwichedRenyi(rho0.matrix(), rho1.matrix(), alpha));
}

namespace {

DivergenceValue measuredFromMatrices(const ComplexMatrix& rho0, const ComplexMatrix& rho1,
                                     const OptimizerConfig& cfg, double supportTol = kPsdTolerance,
                                     const ComplexMatrix* warmStart = nullptr) {
  if (!supportIncluded(rho0, rho1, supportTol)) {
    DivergenceValue inf = DivergenceValue::infinite();
    inf.isLowerBound = true;
    return inf;
  }
  const auto variational =
      detail::variationalMeasured(rho0, rho1, cfg.innerMaxIters * 4, cfg.tolerance, warmStart);
  const auto pvm = detail::pvmSearch(rho0, rho1, cfg.innerMaxIters * 4, cfg.pvmRestarts,
                                     cfg.seed ^ 0x9e3779b97f4a7c15ULL, cfg.tolerance);
  // The eigenbasis of the optimal omega is itself a PVM whose KL is at least
  // the variational value; it competes with the direct search for the witness.
  const ComplexMatrix omegaBasis = hermitianEigen(variational.logOmega).eigenvectors;
  const double omegaKl = detail::basisKl(rho0, rho1, omegaBasis);

  DivergenceValue out;
  out.isLowerBound = true;
  out.variationalEstimate = variational.value;
  out.pvmEstimate = pvm.value;
  out.value = std::max(variational.value, pvm.value);
  DivergenceWitness witness;
  witness.measurement =
      Povm::fromBasis(omegaKl > pvm.value ? omegaBasis : pvm.basis);
  out.witness = std::move(witness);

  const double gap = std::abs(variational.value - pvm.value);
  if (gap > cfg.crossCheckTol) {
    if (gap > 10.0 * cfg.crossCheckTol && variational.stalled)
      throw Error(ErrorCode::OptimizerFailure,
                  "measured relative entropy estimators disagree by " + std::to_string(gap));
    out.warning = "ConvergenceWarning: variational and PVM estimators differ by " +
                  std::to_string(gap);
  }
  return out;
}

}  // namespace

DivergenceValue measuredRelEntropyStates(const DensityMatrix& rho0, const DensityMatrix& rho1,
                                         const OptimizerConfig& cfg) {
  requireSameDim(rho0, rho1);
  return measuredFromMatrices(rho0.matrix(), rho1.matrix(), cfg);
}

ComplexVector productInput(std::span<const Complex> psi, std::size_t ancillaDim,
                           std::size_t inDim, std::size_t l) {
  if (psi.size() != ancillaDim * inDim)
    throw Error(ErrorCode::DimensionMismatch, "productInput: vector dimension");
  ComplexVector v(psi.begin(), psi.end());
  for (std::size_t k = 1; k < l; ++k) {
    ComplexVector next(v.size() * psi.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = 0; j < psi.size(); ++j) next[i * psi.size() + j] = v[i] * psi[j];
    v = std::move(next);
  }
  std::vector<std::size_t> dims, perm;
  for (std::size_t k = 0; k < l; ++k) {
    dims.push_back(ancillaDim);
    dims.push_back(inDim);
  }
  for (std::size_t k = 0; k < l; ++k) perm.push_back(2 * k);
  for (std::size_t k = 0; k < l; ++k) perm.push_back(2 * k + 1);
  return permuteSubsystems(v, dims, perm);
}

namespace {

ComplexVector toVector(const std::vector<double>& x) {
  ComplexVector psi(x.size() / 2);
  double n = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    psi[i] = Complex{x[2 * i], x[2 * i + 1]};
    n += std::norm(psi[i]);
  }
  n = std::sqrt(n);
  if (n == 0.0) {
    psi[0] = 1.0;
    return psi;
  }
  for (auto& z : psi) z /= n;
  return psi;
}

std::vector<double> toParams(std::span<const Complex> psi) {
  std::vector<double> x(2 * psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    x[2 * i] = psi[i].real();
    x[2 * i + 1] = psi[i].imag();
  }
  return x;
}

struct StartResult {
  double value = -kInfinity;
  ComplexVector psi;
};

// Direct objective on output pairs for relEntropy / sandwiched Renyi.
double outputDivergence(const ComplexMatrix& s0, const ComplexMatrix& s1,
                        const DivergenceSpec& kind, double tol) {
  switch (kind.kind) {
    case DivergenceKind::RelativeEntropy: return detail::relEntropy(s0, s1, tol);
    case DivergenceKind::SandwichedRenyi: return detail::sandwichedRenyi(s0, s1, kind.alpha, tol);
    case DivergenceKind::MaxDivergence: return detail::maxDivergence(s0, s1, tol);
    case DivergenceKind::Measured: break;
  }
  throw Error(ErrorCode::InvalidArgument, "outputDivergence: measured kind handled elsewhere");
}

StartResult optimizeSimplex(const QuantumChannel& n0, const QuantumChannel& n1,
                            const DivergenceSpec& kind, const OptimizerConfig& cfg,
                            std::span<const Complex> start, double tol) {
  const std::size_t dR = n0.inDim();
  auto objective = [&](const std::vector<double>& x) {
    const ComplexVector psi = toVector(x);
    const double v = outputDivergence(applyChannelPure(n0, psi, dR), applyChannelPure(n1, psi, dR), kind, tol);
    return std::isfinite(v) ? -v : 1e300;
  };
  auto nm = optimize::nelderMead(objective, toParams(start), 0.2,
                                 static_cast<std::size_t>(cfg.maxIters), 1e-12);
  auto refined = optimize::coordinateRefine(objective, nm.x, 1e-2, 1e-7,
                                            static_cast<std::size_t>(cfg.maxIters));
  StartResult out;
  out.psi = toVector(refined.x);
  out.value = -refined.value;
  return out;
}

// Joint L-BFGS ascent of F(psi, H) = <psi| N0^+(H) - N1^+(exp H) |psi> + 1 over an
// unnormalized input vector and a Hermitian H. The supremum over both is D_M(N0 || N1).
StartResult optimizeJoint(const QuantumChannel& n0, const QuantumChannel& n1,
                          const OptimizerConfig& cfg, std::span<const Complex> start) {
  const std::size_t dR = n0.inDim();
  const std::size_t m = start.size();
  const ComplexMatrix s0 = applyChannelPure(n0, start, dR);
  const ComplexMatrix s1 = applyChannelPure(n1, start, dR);
  const ComplexMatrix h0 =
      detail::variationalMeasured(s0, s1, cfg.innerMaxIters, cfg.tolerance).logOmega;
  const std::size_t n = h0.rows();

  std::vector<double> x0(2 * (n * n + m));
  for (std::size_t i = 0; i < n * n; ++i) {
    x0[2 * i] = h0.data()[i].real();
    x0[2 * i + 1] = h0.data()[i].imag();
  }
  for (std::size_t i = 0; i < m; ++i) {
    x0[2 * (n * n + i)] = start[i].real();
    x0[2 * (n * n + i) + 1] = start[i].imag();
  }
  auto unpack = [&](const std::vector<double>& x, ComplexMatrix& h, ComplexVector& psi) {
    h = ComplexMatrix(n, n);
    for (std::size_t i = 0; i < n * n; ++i) h.data()[i] = Complex{x[2 * i], x[2 * i + 1]};
    h = h.hermitianPart();
    psi.assign(m, Complex{});
    double nrm = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      psi[i] = Complex{x[2 * (n * n + i)], x[2 * (n * n + i) + 1]};
      nrm += std::norm(psi[i]);
    }
    nrm = std::sqrt(nrm);
    for (auto& z : psi) z /= nrm;
    return nrm;
  };

  auto objective = [&](const std::vector<double>& x, std::vector<double>& grad) {
    ComplexMatrix h;
    ComplexVector psi;
    const double nrm = unpack(x, h, psi);
    grad.assign(x.size(), 0.0);
    if (!(nrm > 1e-12)) return 1e300;
    const auto obj = detail::variationalObjective(applyChannelPure(n0, psi, dR),
                                                  applyChannelPure(n1, psi, dR), h);
    if (!std::isfinite(obj.value)) return 1e300;
    const ComplexMatrix mOp =
        (applyAdjointChannel(n0, h, dR) - applyAdjointChannel(n1, obj.expH, dR)).hermitianPart();
    const ComplexVector mPsi = mOp * std::span<const Complex>(psi);
    const double expectation = inner(psi, mPsi).real();
    for (std::size_t i = 0; i < n * n; ++i) {
      grad[2 * i] = -obj.gradient.data()[i].real();
      grad[2 * i + 1] = -obj.gradient.data()[i].imag();
    }
    for (std::size_t i = 0; i < m; ++i) {
      const Complex g = 2.0 * (mPsi[i] - expectation * psi[i]) / nrm;
      grad[2 * (n * n + i)] = -g.real();
      grad[2 * (n * n + i) + 1] = -g.imag();
    }
    return -obj.value;
  };

  const auto result = optimize::lbfgs(objective, std::move(x0),
                                      static_cast<std::size_t>(cfg.maxIters),
                                      std::max(cfg.tolerance, 1e-8));
  ComplexMatrix h;
  StartResult out;
  unpack(result.x, h, out.psi);
  out.value = -result.value;
  return out;
}

DivergenceValue channelDivergenceAt(const QuantumChannel& n0, const QuantumChannel& n1,
                                    const DivergenceSpec& kind, const OptimizerConfig& cfg,
                                    std::span<const ComplexVector> warmStarts, double tol) {
  if (kind.kind == DivergenceKind::SandwichedRenyi && !(kind.alpha > 1.0))
    throw Error(ErrorCode::InvalidAlpha, "sandwiched Renyi needs alpha > 1");
  if (n0.inDim() != n1.inDim() || n0.outDim() != n1.outDim())
    throw Error(ErrorCode::DimensionMismatch, "channels have different dimensions");
  const std::size_t dA = n0.inDim();
  const ComplexVector omega = maximallyEntangled(dA);

  if (!supportIncluded(n0.choi(), n1.choi(), tol)) {
    DivergenceValue inf = DivergenceValue::infinite();
    inf.isLowerBound = kind.kind != DivergenceKind::MaxDivergence;
    DivergenceWitness w;
    w.input = DensityMatrix::pure(omega);
    w.inputVector = omega;
    w.ancillaDim = dA;
    // Some eigenvector of J1 in its kernel carries weight under J0, so this
    // basis already separates the outputs with infinite KL.
    w.measurement = Povm::fromBasis(hermitianEigen(n1.choi()).eigenvectors);
    inf.witness = std::move(w);
    return inf;
  }

  if (kind.kind == DivergenceKind::MaxDivergence) {
    DivergenceValue out;
    out.value = detail::maxDivergence(n0.choi(), n1.choi(), tol);
    DivergenceWitness w;
    w.input = DensityMatrix::pure(omega);
    w.inputVector = omega;
    w.ancillaDim = dA;
    out.witness = std::move(w);
    return out;
  }

  std::vector<ComplexVector> starts;
  if (cfg.includeMaximallyEntangled) starts.push_back(omega);
  for (const auto& w : warmStarts) {
    if (w.size() != dA * dA) throw Error(ErrorCode::DimensionMismatch, "warm start dimension");
    starts.push_back(w);
  }
  {
    random::Engine rng(cfg.seed);
    const int restarts = dA > 2 ? cfg.blockRestarts : cfg.restarts;
    for (int k = 0; k < restarts; ++k) starts.push_back(random::pureState(dA * dA, rng));
  }
  if (starts.empty()) throw Error(ErrorCode::InvalidArgument, "no optimizer starts configured");

  std::vector<StartResult> results(starts.size());
  const auto count = static_cast<long>(starts.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    const auto& s = starts[static_cast<std::size_t>(i)];
    results[static_cast<std::size_t>(i)] = kind.kind == DivergenceKind::Measured
                                               ? optimizeJoint(n0, n1, cfg, s)
                                               : optimizeSimplex(n0, n1, kind, cfg, s, tol);
  }
  // Deterministic reduction: largest value, earliest start on ties.
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i)
    if (results[i].value > results[best].value) best = i;
  const ComplexVector& psi = results[best].psi;

  const ComplexMatrix s0 = applyChannelPure(n0, psi, dA).hermitianPart();
  const ComplexMatrix s1 = applyChannelPure(n1, psi, dA).hermitianPart();
  DivergenceValue out;
  if (kind.kind == DivergenceKind::Measured) {
    out = measuredFromMatrices(s0, s1, cfg, tol);
  } else {
    out.value = outputDivergence(s0, s1, kind, tol);
    out.isFinite = std::isfinite(out.value);
    out.witness = DivergenceWitness{};
  }
  out.isLowerBound = true;
  out.witness->input = DensityMatrix::pure(psi);
  out.witness->inputVector = psi;
  out.witness->ancillaDim = dA;
  return out;
}

}  // namespace

DivergenceValue channelDivergence(const QuantumChannel& n0, const QuantumChannel& n1,
                                  const DivergenceSpec& kind, const OptimizerConfig& cfg,
                                  std::span<const ComplexVector> warmStarts) {
  return channelDivergenceAt(n0, n1, kind, cfg, warmStarts, kPsdTolerance);
}

Povm productMeasurement(const Povm& m, std::size_t ancillaDim, std::size_t outDim, std::size_t l) {
  if (l == 0) throw Error(ErrorCode::InvalidArgument, "block size must be >= 1");
  if (m.dim() != ancillaDim * outDim) throw Error(ErrorCode::DimensionMismatch, "productMeasurement");
  std::vector<std::size_t> dims, perm;
  for (std::size_t k = 0; k < l; ++k) {
    dims.push_back(ancillaDim);
    dims.push_back(outDim);
  }
  for (std::size_t k = 0; k < l; ++k) perm.push_back(2 * k);
  for (std::size_t k = 0; k < l; ++k) perm.push_back(2 * k + 1);
  std::vector<ComplexMatrix> effects = m.effects();
  for (std::size_t k = 1; k < l; ++k) {
    std::vector<ComplexMatrix> next;
    next.reserve(effects.size() * m.outcomeCount());
    for (const auto& a : effects)
      for (const auto& b : m.effects()) next.push_back(kron(a, b));
    effects = std::move(next);
  }
  for (auto& e : effects) e = permuteSubsystems(e, dims, perm);
  return Povm(std::move(effects));
}

double blockSupportTolerance(const QuantumChannel& n0, const QuantumChannel& n1, std::size_t l) {
  double smallest = 1.0;
  for (const auto* ch : {&n0, &n1})
    for (double e : hermitianEigen(ch->choi()).eigenvalues)
      if (e > kPsdTolerance) smallest = std::min(smallest, e);
  const double exponent = l > 1 ? static_cast<double>(l - 1) : 0.0;
  return std::max(1e-14, kPsdTolerance * std::pow(smallest, exponent));
}

BlockEstimate blockDivergence(const QuantumChannel& n0, const QuantumChannel& n1, std::size_t l,
                              const DivergenceSpec& kind, const OptimizerConfig& cfg,
                              std::span<const ComplexVector> warmStarts) {
  if (l == 0) throw Error(ErrorCode::InvalidArgument, "block size must be >= 1");
  BlockEstimate out;
  out.blockSize = l;
  if (l == 1) {
    out.total = channelDivergence(n0, n1, kind, cfg, warmStarts);
    out.valuePerUse = out.total.value;
    return out;
  }
  const QuantumChannel p0 = tensorPowerChannel(n0, l);
  const QuantumChannel p1 = tensorPowerChannel(n1, l);
  std::vector<ComplexVector> starts(warmStarts.begin(), warmStarts.end());
  // supp(J^{(x) l}) = supp(J)^{(x) l}, so the single-use pair settles finiteness.
  if (!supportIncluded(n0.choi(), n1.choi())) {
    const auto single = channelDivergence(n0, n1, kind, cfg);
    out.total = DivergenceValue::infinite();
    out.total.isLowerBound = kind.kind != DivergenceKind::MaxDivergence;
    out.total.witness = single.witness;
    out.valuePerUse = kInfinity;
    return out;
  }
  if (kind.kind != DivergenceKind::MaxDivergence) {
    const auto single = channelDivergence(n0, n1, kind, cfg);
    starts.push_back(productInput(*single.witness->inputVector, n0.inDim(), n0.inDim(), l));
  }
  out.total = channelDivergenceAt(p0, p1, kind, cfg, starts, blockSupportTolerance(n0, n1, l));
  if (kind.kind == DivergenceKind::Measured) {
    // Product strategies are always available; the joint search can miss
    // them when the block outputs are badly conditioned.
    const auto single = channelDivergence(n0, n1, kind, cfg);
    DivergenceWitness w;
    w.inputVector = productInput(*single.witness->inputVector, n0.inDim(), n0.inDim(), l);
    w.input = DensityMatrix::pure(*w.inputVector);
    w.ancillaDim = p0.inDim();
    w.measurement = productMeasurement(*single.witness->measurement, n0.inDim(), n0.outDim(), l);
    const double product = klDivergence(outcomeDistribution(p0, *w.input, w.ancillaDim, *w.measurement),
                                        outcomeDistribution(p1, *w.input, w.ancillaDim, *w.measurement));
    if (product > out.total.value) {
      out.total.value = product;
      out.total.witness = std::move(w);
    }
  }
  out.valuePerUse = out.total.value / static_cast<double>(l);
  return out;
}

}  // namespace seqchan
