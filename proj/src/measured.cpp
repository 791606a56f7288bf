// Two independent estimators of the measured relative entropy
//   D_M(rho || sigma) = sup_{omega > 0} Tr[rho log omega] + 1 - Tr[sigma omega]
//                     = sup over orthonormal bases of KL(P_U || Q_U).
#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

#include "seqchan/divergences.hpp"
#include "seqchan/error.hpp"

namespace seqchan::detail {

namespace {

constexpr double kLogClamp = 60.0;
constexpr double kArmijo = 1e-4;
constexpr std::size_t kMemory = 8;

double realInner(const ComplexMatrix& a, const ComplexMatrix& b) {
  double s = 0.0;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i)
    s += da[i].real() * db[i].real() + da[i].imag() * db[i].imag();
  return s;
}

void axpy(ComplexMatrix& y, double a, const ComplexMatrix& x) {
  auto dy = y.data();
  const auto dx = x.data();
  for (std::size_t i = 0; i < dy.size(); ++i) dy[i] += a * dx[i];
}

double dividedDifferenceExp(double a, double b) {
  const double d = a - b;
  if (std::abs(d) < 1e-12) return std::exp(0.5 * (a + b));
  return std::exp(b) * std::expm1(d) / d;
}

ComplexMatrix conjugate(const ComplexMatrix& v, const ComplexMatrix& m) {
  return v.adjoint() * m * v;
}

struct Evaluation {
  double value = 0.0;
  ComplexMatrix grad;  // Hermitian; ascent direction of f at H
};

Evaluation evaluate(const ComplexMatrix& rho, const ComplexMatrix& sigma, const ComplexMatrix& h) {
  auto full = variationalObjective(rho, sigma, h);
  return Evaluation{full.value, std::move(full.gradient)};
}

// Keep the eigenbasis of H, replace its eigenvalues by the optimal log(r_ii / s_ii).
ComplexMatrix polish(const ComplexMatrix& rho, const ComplexMatrix& sigma, const ComplexMatrix& h) {
  const auto eig = hermitianEigen(h);
  const ComplexMatrix r = conjugate(eig.eigenvectors, rho);
  const ComplexMatrix s = conjugate(eig.eigenvectors, sigma);
  RealVector hv(h.rows());
  for (std::size_t i = 0; i < hv.size(); ++i) {
    const double ri = r(i, i).real();
    const double si = s(i, i).real();
    if (ri <= 1e-300) hv[i] = -kLogClamp;
    else if (si <= 1e-300) hv[i] = kLogClamp;
    else hv[i] = std::clamp(std::log(ri / si), -kLogClamp, kLogClamp);
  }
  return reconstruct(eig, hv);
}

}  // namespace

// Gradient rho - V (Gamma o V^+ sigma V) V^+, Gamma the divided differences of exp.
VariationalObjective variationalObjective(const ComplexMatrix& rho, const ComplexMatrix& sigma,
                                          const ComplexMatrix& h) {
  const auto eig = hermitianEigen(h);
  const ComplexMatrix s = conjugate(eig.eigenvectors, sigma);
  const std::size_t n = h.rows();
  VariationalObjective out;
  out.value = traceProduct(rho, h).real() + 1.0;
  ComplexMatrix weighted(n, n);
  RealVector expValues(n);
  for (std::size_t i = 0; i < n; ++i) {
    expValues[i] = std::exp(eig.eigenvalues[i]);
    out.value -= expValues[i] * s(i, i).real();
    for (std::size_t j = 0; j < n; ++j)
      weighted(i, j) = dividedDifferenceExp(eig.eigenvalues[i], eig.eigenvalues[j]) * s(i, j);
  }
  out.gradient = (rho - eig.eigenvectors * weighted * eig.eigenvectors.adjoint()).hermitianPart();
  out.expH = reconstruct(eig, expValues);
  return out;
}

VariationalResult variationalMeasured(const ComplexMatrix& rho, const ComplexMatrix& sigma,
                                      int maxIters, double tolerance,
                                      const ComplexMatrix* warmStart) {
  const std::size_t n = rho.rows();
  ComplexMatrix h = warmStart ? warmStart->hermitianPart() : ComplexMatrix(n, n);
  h = polish(rho, sigma, h);
  Evaluation cur = evaluate(rho, sigma, h);

  // L-BFGS on -f.
  std::deque<std::pair<ComplexMatrix, ComplexMatrix>> memory;  // (s, y)
  double gnorm = cur.grad.frobeniusNorm();
  int stall = 0;
  bool stalled = false;
  for (int iter = 0; iter < maxIters && gnorm > tolerance; ++iter) {
    ComplexMatrix q = cur.grad;
    std::vector<double> alphas(memory.size());
    for (std::size_t k = memory.size(); k-- > 0;) {
      const auto& [s, y] = memory[k];
      alphas[k] = realInner(s, q) / realInner(s, y);
      axpy(q, -alphas[k], y);
    }
    if (!memory.empty()) {
      const auto& [s, y] = memory.back();
      q *= Complex{realInner(s, y) / realInner(y, y), 0.0};
    } else {
      q *= Complex{std::min(1.0, 1.0 / gnorm), 0.0};
    }
    for (std::size_t k = 0; k < memory.size(); ++k) {
      const auto& [s, y] = memory[k];
      const double beta = realInner(y, q) / realInner(s, y);
      axpy(q, alphas[k] - beta, s);
    }
    double slope = realInner(cur.grad, q);
    if (!(slope > 0.0)) {
      memory.clear();
      q = cur.grad;
      q *= Complex{std::min(1.0, 1.0 / gnorm), 0.0};
      slope = realInner(cur.grad, q);
    }

    bool accepted = false;
    double t = 1.0;
    Evaluation next;
    ComplexMatrix trial;
    for (int ls = 0; ls < 50; ++ls, t *= 0.5) {
      trial = h;
      axpy(trial, t, q);
      next = evaluate(rho, sigma, trial);
      if (std::isfinite(next.value) && next.value >= cur.value + kArmijo * t * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (memory.empty()) {
        stalled = true;
        break;
      }
      memory.clear();
      continue;
    }
    ComplexMatrix step = trial - h;
    ComplexMatrix dy = cur.grad - next.grad;
    if (realInner(step, dy) > 1e-300) {
      memory.emplace_back(std::move(step), std::move(dy));
      if (memory.size() > kMemory) memory.pop_front();
    }
    stall = (next.value - cur.value <= 1e-15 * (1.0 + std::abs(cur.value))) ? stall + 1 : 0;
    h = std::move(trial);
    cur = std::move(next);
    gnorm = cur.grad.frobeniusNorm();
    if (stall >= 5) {
      stalled = true;
      break;
    }
  }

  const ComplexMatrix polished = polish(rho, sigma, h);
  const Evaluation finalEval = evaluate(rho, sigma, polished);
  VariationalResult out;
  if (finalEval.value >= cur.value) {
    out.value = finalEval.value;
    out.logOmega = polished.hermitianPart();
    gnorm = std::min(gnorm, finalEval.grad.frobeniusNorm());
  } else {
    out.value = cur.value;
    out.logOmega = h.hermitianPart();
  }
  out.value = std::max(out.value, 0.0);
  out.converged = gnorm <= std::max(tolerance, 1e-6);
  out.stalled = stalled && !out.converged;
  return out;
}

double basisKl(const ComplexMatrix& rho, const ComplexMatrix& sigma, const ComplexMatrix& basis) {
  const std::size_t n = basis.cols();
  double kl = 0.0;
  for (std::size_t y = 0; y < n; ++y) {
    double p = 0.0, q = 0.0;
    for (std::size_t i = 0; i < rho.rows(); ++i)
      for (std::size_t j = 0; j < rho.cols(); ++j) {
        const Complex w = std::conj(basis(i, y)) * basis(j, y);
        p += (w * rho(i, j)).real();
        q += (w * sigma(i, j)).real();
      }
    if (p < 1e-14) continue;
    if (q <= 1e-300) return kInfinity;
    kl += p * std::log(p / q);
  }
  return std::max(kl, 0.0);
}

namespace {

// Body-frame ascent direction X (anti-Hermitian) of U -> KL at U; the
// directional derivative along U exp(tY) is -<G, Y> with G = [Da, R] - [Db, Q].
ComplexMatrix basisGradient(const ComplexMatrix& rho, const ComplexMatrix& sigma,
                            const ComplexMatrix& u) {
  const std::size_t n = u.rows();
  const ComplexMatrix r = conjugate(u, rho);
  const ComplexMatrix q = conjugate(u, sigma);
  RealVector a(n), b(n);
  for (std::size_t y = 0; y < n; ++y) {
    const double p = std::max(r(y, y).real(), 1e-30);
    const double s = std::max(q(y, y).real(), 1e-30);
    a[y] = std::log(p / s) + 1.0;
    b[y] = p / s;
  }
  ComplexMatrix x(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) x(i, j) = -((a[i] - a[j]) * r(i, j) - (b[i] - b[j]) * q(i, j));
  return x;
}

// Modified Gram-Schmidt on the columns; removes rounding drift from repeated retractions.
void orthonormalize(ComplexMatrix& u) {
  const std::size_t n = u.rows();
  for (std::size_t c = 0; c < u.cols(); ++c) {
    for (std::size_t k = 0; k < c; ++k) {
      Complex d = 0.0;
      for (std::size_t i = 0; i < n; ++i) d += std::conj(u(i, k)) * u(i, c);
      for (std::size_t i = 0; i < n; ++i) u(i, c) -= d * u(i, k);
    }
    double nrm = 0.0;
    for (std::size_t i = 0; i < n; ++i) nrm += std::norm(u(i, c));
    nrm = std::sqrt(nrm);
    for (std::size_t i = 0; i < n; ++i) u(i, c) /= nrm;
  }
}

// Riemannian L-BFGS on the unitary group. Directions live in the body frame
// (U -> U cayley(tX)), where transport between iterates is the identity.
double ascendBasis(const ComplexMatrix& rho, const ComplexMatrix& sigma, ComplexMatrix& u,
                   int maxIters, double tolerance) {
  double value = basisKl(rho, sigma, u);
  if (!std::isfinite(value)) return value;
  ComplexMatrix grad = basisGradient(rho, sigma, u);
  std::deque<std::pair<ComplexMatrix, ComplexMatrix>> memory;
  for (int iter = 0; iter < maxIters; ++iter) {
    const double gnorm = grad.frobeniusNorm();
    if (gnorm <= tolerance) break;
    ComplexMatrix dir = grad;
    std::vector<double> alphas(memory.size());
    for (std::size_t k = memory.size(); k-- > 0;) {
      const auto& [s, y] = memory[k];
      alphas[k] = realInner(s, dir) / realInner(s, y);
      axpy(dir, -alphas[k], y);
    }
    if (!memory.empty()) {
      const auto& [s, y] = memory.back();
      dir *= Complex{realInner(s, y) / realInner(y, y), 0.0};
    } else {
      dir *= Complex{std::min(1.0, 1.0 / gnorm), 0.0};
    }
    for (std::size_t k = 0; k < memory.size(); ++k) {
      const auto& [s, y] = memory[k];
      axpy(dir, alphas[k] - realInner(y, dir) / realInner(s, y), s);
    }
    double slope = realInner(grad, dir);
    if (!(slope > 0.0)) {
      memory.clear();
      dir = grad;
      dir *= Complex{std::min(1.0, 1.0 / gnorm), 0.0};
      slope = realInner(grad, dir);
    }
    bool accepted = false;
    double t = 1.0;
    for (int ls = 0; ls < 50; ++ls, t *= 0.5) {
      ComplexMatrix candidate = u * cayley(Complex{t, 0.0} * dir);
      const double v = basisKl(rho, sigma, candidate);
      if (std::isfinite(v) && v >= value + kArmijo * t * slope) {
        u = std::move(candidate);
        if (iter % 32 == 31) orthonormalize(u);
        value = v;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (memory.empty()) break;
      memory.clear();
      continue;
    }
    ComplexMatrix nextGrad = basisGradient(rho, sigma, u);
    ComplexMatrix step = Complex{t, 0.0} * dir;
    ComplexMatrix dy = grad - nextGrad;
    if (realInner(step, dy) > 1e-300) {
      memory.emplace_back(std::move(step), std::move(dy));
      if (memory.size() > kMemory) memory.pop_front();
    }
    grad = std::move(nextGrad);
  }
  orthonormalize(u);
  return basisKl(rho, sigma, u);
}

}  // namespace

PvmSearchResult pvmSearch(const ComplexMatrix& rho, const ComplexMatrix& sigma, int maxIters,
                          int randomStarts, std::uint64_t seed, double tolerance) {
  const std::size_t n = rho.rows();
  std::vector<ComplexMatrix> starts;
  starts.push_back(hermitianEigen(rho).eigenvectors);
  starts.push_back(hermitianEigen(sigma).eigenvectors);
  starts.push_back(hermitianEigen((rho - sigma).hermitianPart()).eigenvectors);
  random::Engine rng(seed);
  for (int k = 0; k < randomStarts; ++k) starts.push_back(random::haarUnitary(n, rng));

  PvmSearchResult best;
  best.value = -1.0;
  for (auto& u : starts) {
    const double v = ascendBasis(rho, sigma, u, maxIters, tolerance);
    if (v > best.value) {
      best.value = v;
      best.basis = u;
    }
  }
  return best;
}

}  // namespace seqchan::detail
