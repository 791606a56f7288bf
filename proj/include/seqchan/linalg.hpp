#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace seqchan {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;
using RealVector = std::vector<double>;

/// Absolute tolerance on eigenvalues used by every PSD / support check.
inline constexpr double kPsdTolerance = 1e-9;

/// Largest matrix dimension any kron / tensor power may produce.
inline constexpr std::size_t kDefaultDimensionCap = 4096;

/// Dense row-major complex matrix.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);

  static ComplexMatrix identity(std::size_t dim);
  static ComplexMatrix diagonal(std::span<const double> diag);
  static ComplexMatrix diagonal(std::span<const Complex> diag);
  /// |v><v|
  static ComplexMatrix outer(std::span<const Complex> v);
  static ComplexMatrix outer(std::span<const Complex> u, std::span<const Complex> v);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool isSquare() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return data_.empty(); }

  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<Complex> data() noexcept { return data_; }
  std::span<const Complex> data() const noexcept { return data_; }

  ComplexMatrix adjoint() const;
  ComplexMatrix transpose() const;
  Complex trace() const;
  double frobeniusNorm() const;
  bool allFinite() const;

  /// (H + H^dagger)/2.
  ComplexMatrix hermitianPart() const;

  ComplexMatrix& operator+=(const ComplexMatrix& other);
  ComplexMatrix& operator-=(const ComplexMatrix& other);
  ComplexMatrix& operator*=(Complex s);

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(Complex s, ComplexMatrix a);
ComplexVector operator*(const ComplexMatrix& a, std::span<const Complex> v);

/// Tr(A B) without forming the product.
Complex traceProduct(const ComplexMatrix& a, const ComplexMatrix& b);

/// <u|v>
Complex inner(std::span<const Complex> u, std::span<const Complex> v);
double norm(std::span<const Complex> v);

struct HermitianEig {
  RealVector eigenvalues;      // ascending
  ComplexMatrix eigenvectors;  // columns
};

/// Hermitian eigendecomposition (Householder tridiagonalization + implicit QR).
/// The input is symmetrized first; inputs whose anti-Hermitian part exceeds
/// 1e-9 max(1, |H|_F) are rejected.
HermitianEig hermitianEigen(const ComplexMatrix& h);

/// Cyclic complex Jacobi (cap 100 sweeps). Slower; kept as the reference
/// route the fast solver is tested against.
HermitianEig jacobiEigen(const ComplexMatrix& h);

/// V f(lambda) V^dagger from an existing decomposition.
ComplexMatrix reconstruct(const HermitianEig& eig, std::span<const double> values);

enum class SpectralFunction { Log, Exp, Power, Sqrt, InverseSqrt };

/// V f(lambda) V^dagger. With supportOnly, eigenvalues at or below
/// supportTol map to zero; otherwise log / fractional powers of a negative
/// eigenvalue (below -kPsdTolerance) raise NegativeEigenvalue.
ComplexMatrix matrixFunction(const ComplexMatrix& h, const std::function<double(double)>& f,
                             bool supportOnly = false);
ComplexMatrix matrixFunction(const ComplexMatrix& h, SpectralFunction f, bool supportOnly = false,
                             double exponent = 1.0, double supportTol = kPsdTolerance);
ComplexMatrix matrixFunction(const HermitianEig& eig, SpectralFunction f, bool supportOnly = false,
                             double exponent = 1.0, double supportTol = kPsdTolerance);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b,
                   std::size_t dimensionCap = kDefaultDimensionCap);

/// Trace out every factor not listed in `keep`. Kept factors stay in their
/// original order.
ComplexMatrix partialTrace(const ComplexMatrix& m, std::span<const std::size_t> dims,
                           std::span<const std::size_t> keep);

/// Reorder tensor factors: output factor k is input factor perm[k].
ComplexMatrix permuteSubsystems(const ComplexMatrix& m, std::span<const std::size_t> dims,
                                std::span<const std::size_t> perm);
ComplexVector permuteSubsystems(std::span<const Complex> v, std::span<const std::size_t> dims,
                                std::span<const std::size_t> perm);

/// Projector onto the span of eigenvectors with eigenvalue > tol.
ComplexMatrix supportProjector(const HermitianEig& eig, double tol = kPsdTolerance);

/// exp(X) for anti-Hermitian X (a unitary).
ComplexMatrix expAntiHermitian(const ComplexMatrix& x);

/// Cayley transform (I - X/2)^{-1} (I + X/2); unitary for anti-Hermitian X.
ComplexMatrix cayley(const ComplexMatrix& x);

}  // namespace seqchan
