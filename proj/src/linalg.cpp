#include "seqchan/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "seqchan/error.hpp"

namespace seqchan {

std::string_view errorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::NegativeEigenvalue: return "NegativeEigenvalue";
    case ErrorCode::DimensionOverflow: return "DimensionOverflow";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::InvalidChannel: return "InvalidChannel";
    case ErrorCode::InvalidPovm: return "InvalidPovm";
    case ErrorCode::NormalizationFailure: return "NormalizationFailure";
    case ErrorCode::InvalidAlpha: return "InvalidAlpha";
    case ErrorCode::OptimizerFailure: return "OptimizerFailure";
    case ErrorCode::InfiniteDivergence: return "InfiniteDivergence";
    case ErrorCode::TauTooLarge: return "TauTooLarge";
    case ErrorCode::ZeroProbabilityOutcome: return "ZeroProbabilityOutcome";
    case ErrorCode::SupportMismatch: return "SupportMismatch";
    case ErrorCode::ExcessiveCensoring: return "ExcessiveCensoring";
    case ErrorCode::DegenerateSampling: return "DegenerateSampling";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, Complex{0.0, 0.0}) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::DimensionMismatch, "entry count does not match rows*cols");
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t dim) {
  ComplexMatrix m(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> diag) {
  ComplexMatrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const Complex> diag) {
  ComplexMatrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

ComplexMatrix ComplexMatrix::outer(std::span<const Complex> v) { return outer(v, v); }

ComplexMatrix ComplexMatrix::outer(std::span<const Complex> u, std::span<const Complex> v) {
  ComplexMatrix m(u.size(), v.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = u[i] * std::conj(v[j]);
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
  return out;
}

ComplexMatrix ComplexMatrix::transpose() const {
  ComplexMatrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  return out;
}

Complex ComplexMatrix::trace() const {
  if (!isSquare()) throw Error(ErrorCode::NonSquare, "trace of a non-square matrix");
  Complex t{0.0, 0.0};
  for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
  return t;
}

double ComplexMatrix::frobeniusNorm() const {
  double s = 0.0;
  for (const auto& z : data_) s += std::norm(z);
  return std::sqrt(s);
}

bool ComplexMatrix::allFinite() const {
  return std::all_of(data_.begin(), data_.end(), [](const Complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

ComplexMatrix ComplexMatrix::hermitianPart() const {
  if (!isSquare()) throw Error(ErrorCode::NonSquare, "hermitian part of a non-square matrix");
  ComplexMatrix out(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j)
      out(i, j) = 0.5 * ((*this)(i, j) + std::conj((*this)(j, i)));
  return out;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw Error(ErrorCode::DimensionMismatch, "matrix addition");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw Error(ErrorCode::DimensionMismatch, "matrix subtraction");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex s) {
  for (auto& z : data_) z *= s;
  return *this;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::DimensionMismatch, "matrix product");
  ComplexMatrix out(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    Complex* row = &out(i, 0);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex{0.0, 0.0}) continue;
      const Complex* brow = &b(k, 0);
      for (std::size_t j = 0; j < n; ++j) row[j] += aik * brow[j];
    }
  }
  return out;
}

ComplexVector operator*(const ComplexMatrix& a, std::span<const Complex> v) {
  if (a.cols() != v.size()) throw Error(ErrorCode::DimensionMismatch, "matrix-vector product");
  ComplexVector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    Complex s{0.0, 0.0};
    for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * v[k];
    out[i] = s;
  }
  return out;
}

Complex traceProduct(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows() || a.rows() != b.cols())
    throw Error(ErrorCode::DimensionMismatch, "trace of product");
  Complex t{0.0, 0.0};
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) t += a(i, k) * b(k, i);
  return t;
}

Complex inner(std::span<const Complex> u, std::span<const Complex> v) {
  if (u.size() != v.size()) throw Error(ErrorCode::DimensionMismatch, "inner product");
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < u.size(); ++i) s += std::conj(u[i]) * v[i];
  return s;
}

double norm(std::span<const Complex> v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return std::sqrt(s);
}

namespace {

constexpr int kMaxJacobiSweeps = 100;

double offDiagonalNorm(const ComplexMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

}  // namespace

HermitianEig jacobiEigen(const ComplexMatrix& h) {
  if (!h.isSquare()) throw Error(ErrorCode::NonSquare, "hermitianEigen needs a square matrix");
  const std::size_t n = h.rows();
  const double hnorm = h.frobeniusNorm();
  if (!std::isfinite(hnorm)) throw Error(ErrorCode::NotHermitian, "non-finite entries");
  {
    double skew = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) skew += std::norm(h(i, j) - std::conj(h(j, i)));
    if (std::sqrt(skew) > 1e-9 * std::max(1.0, hnorm))
      throw Error(ErrorCode::NotHermitian, "input exceeds the Hermiticity tolerance");
  }

  ComplexMatrix a = h.hermitianPart();
  ComplexMatrix v = ComplexMatrix::identity(n);

  const double target = std::max(hnorm, 1e-300) * 1e-15;
  int sweep = 0;
  for (; sweep < kMaxJacobiSweeps; ++sweep) {
    if (offDiagonalNorm(a) <= target) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Complex apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag == 0.0) continue;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        // Skip rotations that cannot change the diagonal at working precision.
        if (sweep > 3 && mag < 1e-300 + 1e-18 * (std::abs(app) + std::abs(aqq))) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        const Complex phase = apq / mag;
        const double tau = (aqq - app) / (2.0 * mag);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // G = diag(1, conj(phase)) * [[c, s], [-s, c]] on columns (p, q).
        const Complex gpp = c;
        const Complex gpq = s;
        const Complex gqp = -s * std::conj(phase);
        const Complex gqq = c * std::conj(phase);
        // A <- A G
        for (std::size_t k = 0; k < n; ++k) {
          const Complex akp = a(k, p);
          const Complex akq = a(k, q);
          a(k, p) = akp * gpp + akq * gqp;
          a(k, q) = akp * gpq + akq * gqq;
        }
        // A <- G^dagger A
        for (std::size_t k = 0; k < n; ++k) {
          const Complex apk = a(p, k);
          const Complex aqk = a(q, k);
          a(p, k) = std::conj(gpp) * apk + std::conj(gqp) * aqk;
          a(q, k) = std::conj(gpq) * apk + std::conj(gqq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (std::size_t k = 0; k < n; ++k) {
          const Complex vkp = v(k, p);
          const Complex vkq = v(k, q);
          v(k, p) = vkp * gpp + vkq * gqp;
          v(k, q) = vkp * gpq + vkq * gqq;
        }
      }
    }
  }
  if (sweep == kMaxJacobiSweeps && offDiagonalNorm(a) > target * 1e3)
    throw Error(ErrorCode::ConvergenceFailure, "Jacobi sweep cap reached");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });
  HermitianEig out;
  out.eigenvalues.resize(n);
  out.eigenvectors = ComplexMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]).real();
    for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, k) = v(r, order[k]);
  }
  return out;
}

namespace {

void requireHermitian(const ComplexMatrix& h, double hnorm) {
  if (!h.isSquare()) throw Error(ErrorCode::NonSquare, "hermitianEigen needs a square matrix");
  if (!std::isfinite(hnorm)) throw Error(ErrorCode::NotHermitian, "non-finite entries");
  const std::size_t n = h.rows();
  double skew = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) skew += std::norm(h(i, j) - std::conj(h(j, i)));
  if (std::sqrt(skew) > 1e-9 * std::max(1.0, hnorm))
    throw Error(ErrorCode::NotHermitian, "input exceeds the Hermiticity tolerance");
}

}  // namespace

HermitianEig hermitianEigen(const ComplexMatrix& h) {
  requireHermitian(h, h.frobeniusNorm());
  const std::size_t n = h.rows();
  using Mat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Mat a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (h(i, j) + std::conj(h(j, i)));
  Eigen::SelfAdjointEigenSolver<Mat> solver(a);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::ConvergenceFailure, "tridiagonal QR did not converge");
  HermitianEig out;
  out.eigenvalues.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  out.eigenvectors = ComplexMatrix(n, n);
  const auto& v = solver.eigenvectors();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out.eigenvectors(i, j) = v(i, j);
  return out;
}

ComplexMatrix reconstruct(const HermitianEig& eig, std::span<const double> values) {
  const std::size_t n = eig.eigenvalues.size();
  if (values.size() != n) throw Error(ErrorCode::DimensionMismatch, "reconstruct");
  ComplexMatrix out(n, n);
  const auto& v = eig.eigenvectors;
  for (std::size_t k = 0; k < n; ++k) {
    const double f = values[k];
    if (f == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const Complex vik = v(i, k) * f;
      for (std::size_t j = 0; j < n; ++j) out(i, j) += vik * std::conj(v(j, k));
    }
  }
  return out;
}

ComplexMatrix matrixFunction(const ComplexMatrix& h, const std::function<double(double)>& f,
                             bool supportOnly) {
  const auto eig = hermitianEigen(h);
  RealVector values(eig.eigenvalues.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double lambda = eig.eigenvalues[k];
    values[k] = (supportOnly && lambda <= kPsdTolerance) ? 0.0 : f(lambda);
  }
  return reconstruct(eig, values);
}

ComplexMatrix matrixFunction(const HermitianEig& eig, SpectralFunction f, bool supportOnly,
                             double exponent, double supportTol) {
  const bool needsPositive = f == SpectralFunction::Log || f == SpectralFunction::Sqrt ||
                             f == SpectralFunction::InverseSqrt ||
                             (f == SpectralFunction::Power && exponent != std::round(exponent));
  RealVector values(eig.eigenvalues.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    double lambda = eig.eigenvalues[k];
    if (needsPositive && lambda < -kPsdTolerance)
      throw Error(ErrorCode::NegativeEigenvalue, "spectral function needs a PSD argument");
    if (supportOnly && lambda <= supportTol) {
      values[k] = 0.0;
      continue;
    }
    if (needsPositive) lambda = std::max(lambda, 0.0);
    switch (f) {
      case SpectralFunction::Log: values[k] = std::log(lambda); break;
      case SpectralFunction::Exp: values[k] = std::exp(lambda); break;
      case SpectralFunction::Power: values[k] = std::pow(lambda, exponent); break;
      case SpectralFunction::Sqrt: values[k] = std::sqrt(lambda); break;
      case SpectralFunction::InverseSqrt: values[k] = 1.0 / std::sqrt(lambda); break;
    }
  }
  return reconstruct(eig, values);
}

ComplexMatrix matrixFunction(const ComplexMatrix& h, SpectralFunction f, bool supportOnly,
                             double exponent, double supportTol) {
  return matrixFunction(hermitianEigen(h), f, supportOnly, exponent, supportTol);
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b, std::size_t dimensionCap) {
  const std::size_t rows = a.rows() * b.rows();
  const std::size_t cols = a.cols() * b.cols();
  if (rows > dimensionCap || cols > dimensionCap)
    throw Error(ErrorCode::DimensionOverflow, "kron result exceeds the dimension cap");
  ComplexMatrix out(rows, cols);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const Complex aij = a(i, j);
      if (aij == Complex{0.0, 0.0}) continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return out;
}

namespace {

std::size_t product(std::span<const std::size_t> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

// Row-major multi-index decomposition of a flat index.
void unflatten(std::size_t flat, std::span<const std::size_t> dims, std::vector<std::size_t>& idx) {
  for (std::size_t k = dims.size(); k-- > 0;) {
    idx[k] = flat % dims[k];
    flat /= dims[k];
  }
}

}  // namespace

ComplexMatrix partialTrace(const ComplexMatrix& m, std::span<const std::size_t> dims,
                           std::span<const std::size_t> keep) {
  const std::size_t total = product(dims);
  if (!m.isSquare() || m.rows() != total)
    throw Error(ErrorCode::DimensionMismatch, "partialTrace: dims do not match the matrix");
  std::vector<bool> kept(dims.size(), false);
  for (auto k : keep) {
    if (k >= dims.size()) throw Error(ErrorCode::DimensionMismatch, "partialTrace: bad keep index");
    kept[k] = true;
  }
  std::vector<std::size_t> keptDims;
  for (std::size_t k = 0; k < dims.size(); ++k)
    if (kept[k]) keptDims.push_back(dims[k]);
  const std::size_t outDim = product(keptDims);
  ComplexMatrix out(outDim, outDim);

  std::vector<std::size_t> ri(dims.size()), ci(dims.size());
  auto keptIndex = [&](const std::vector<std::size_t>& idx) {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < dims.size(); ++k)
      if (kept[k]) flat = flat * dims[k] + idx[k];
    return flat;
  };
  for (std::size_t r = 0; r < total; ++r) {
    unflatten(r, dims, ri);
    for (std::size_t c = 0; c < total; ++c) {
      unflatten(c, dims, ci);
      bool diag = true;
      for (std::size_t k = 0; k < dims.size() && diag; ++k)
        if (!kept[k] && ri[k] != ci[k]) diag = false;
      if (diag) out(keptIndex(ri), keptIndex(ci)) += m(r, c);
    }
  }
  return out;
}

namespace {

std::vector<std::size_t> permutationMap(std::span<const std::size_t> dims,
                                        std::span<const std::size_t> perm) {
  if (perm.size() != dims.size()) throw Error(ErrorCode::DimensionMismatch, "permutation size");
  std::vector<bool> seen(dims.size(), false);
  for (auto p : perm) {
    if (p >= dims.size() || seen[p]) throw Error(ErrorCode::InvalidArgument, "not a permutation");
    seen[p] = true;
  }
  std::vector<std::size_t> outDims(dims.size());
  for (std::size_t k = 0; k < dims.size(); ++k) outDims[k] = dims[perm[k]];
  const std::size_t total = product(dims);
  std::vector<std::size_t> map(total), idx(dims.size());
  for (std::size_t flat = 0; flat < total; ++flat) {
    unflatten(flat, dims, idx);
    std::size_t out = 0;
    for (std::size_t k = 0; k < dims.size(); ++k) out = out * outDims[k] + idx[perm[k]];
    map[flat] = out;
  }
  return map;
}

}  // namespace

ComplexMatrix permuteSubsystems(const ComplexMatrix& m, std::span<const std::size_t> dims,
                                std::span<const std::size_t> perm) {
  if (!m.isSquare() || m.rows() != product(dims))
    throw Error(ErrorCode::DimensionMismatch, "permuteSubsystems: dims do not match");
  const auto map = permutationMap(dims, perm);
  ComplexMatrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(map[r], map[c]) = m(r, c);
  return out;
}

ComplexVector permuteSubsystems(std::span<const Complex> v, std::span<const std::size_t> dims,
                                std::span<const std::size_t> perm) {
  if (v.size() != product(dims))
    throw Error(ErrorCode::DimensionMismatch, "permuteSubsystems: dims do not match");
  const auto map = permutationMap(dims, perm);
  ComplexVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[map[i]] = v[i];
  return out;
}

ComplexMatrix supportProjector(const HermitianEig& eig, double tol) {
  RealVector values(eig.eigenvalues.size());
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = eig.eigenvalues[k] > tol ? 1.0 : 0.0;
  return reconstruct(eig, values);
}

ComplexMatrix expAntiHermitian(const ComplexMatrix& x) {
  // X = -i H with H = i X Hermitian, so exp(X) = V exp(-i lambda) V^dagger.
  ComplexMatrix h = Complex{0.0, 1.0} * x;
  const auto eig = hermitianEigen(h.hermitianPart());
  const std::size_t n = x.rows();
  ComplexMatrix out(n, n);
  const auto& v = eig.eigenvectors;
  for (std::size_t k = 0; k < n; ++k) {
    const Complex phase = std::polar(1.0, -eig.eigenvalues[k]);
    for (std::size_t i = 0; i < n; ++i) {
      const Complex vik = v(i, k) * phase;
      for (std::size_t j = 0; j < n; ++j) out(i, j) += vik * std::conj(v(j, k));
    }
  }
  return out;
}

ComplexMatrix cayley(const ComplexMatrix& x) {
  if (!x.isSquare()) throw Error(ErrorCode::NonSquare, "cayley needs a square matrix");
  const std::size_t n = x.rows();
  using Mat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Mat lhs = Mat::Identity(n, n), rhs = Mat::Identity(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      lhs(i, j) -= 0.5 * x(i, j);
      rhs(i, j) += 0.5 * x(i, j);
    }
  const Mat sol = lhs.partialPivLu().solve(rhs);
  ComplexMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) = sol(i, j);
  return out;
}

}  // namespace seqchan
