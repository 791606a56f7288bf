#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "seqchan/linalg.hpp"

namespace seqchan {

/// Hermitian PSD unit-trace matrix. Construction validates.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(ComplexMatrix mat, std::optional<std::string> label = std::nullopt);

  static DensityMatrix pure(std::span<const Complex> psi);
  static DensityMatrix maximallyMixed(std::size_t dim);

  std::size_t dim() const noexcept { return mat_.rows(); }
  const ComplexMatrix& matrix() const noexcept { return mat_; }
  const std::optional<std::string>& label() const noexcept { return label_; }

  friend bool operator==(const DensityMatrix&, const DensityMatrix&) = default;

 private:
  ComplexMatrix mat_;
  std::optional<std::string> label_;
};

/// CPTP map in Kraus form; the unit-trace Choi state is cached at construction.
class QuantumChannel {
 public:
  QuantumChannel() = default;
  QuantumChannel(std::vector<ComplexMatrix> kraus, std::optional<std::string> label = std::nullopt);

  std::size_t inDim() const noexcept { return inDim_; }
  std::size_t outDim() const noexcept { return outDim_; }
  const std::vector<ComplexMatrix>& kraus() const noexcept { return kraus_; }
  const ComplexMatrix& choi() const noexcept { return choi_; }
  const std::optional<std::string>& label() const noexcept { return label_; }

  friend bool operator==(const QuantumChannel& a, const QuantumChannel& b) {
    return a.kraus_ == b.kraus_;
  }

 private:
  std::size_t inDim_ = 0;
  std::size_t outDim_ = 0;
  std::vector<ComplexMatrix> kraus_;
  ComplexMatrix choi_;
  std::optional<std::string> label_;
};

class Povm {
 public:
  Povm() = default;
  explicit Povm(std::vector<ComplexMatrix> effects);

  /// Rank-one PVM from the columns of a unitary.
  static Povm fromBasis(const ComplexMatrix& unitary);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t outcomeCount() const noexcept { return effects_.size(); }
  const std::vector<ComplexMatrix>& effects() const noexcept { return effects_; }
  bool isPvm() const noexcept { return isPvm_; }

  friend bool operator==(const Povm& a, const Povm& b) { return a.effects_ == b.effects_; }

 private:
  std::size_t dim_ = 0;
  std::vector<ComplexMatrix> effects_;
  bool isPvm_ = false;
};

/// (id_R (x) channel)(state) with R of dimension ancillaDim placed first.
DensityMatrix applyChannel(const QuantumChannel& ch, const DensityMatrix& state,
                           std::size_t ancillaDim);

/// Output for a pure bipartite input |psi> on R (x) A without forming |psi><psi|.
ComplexMatrix applyChannelPure(const QuantumChannel& ch, std::span<const Complex> psi,
                               std::size_t ancillaDim);

/// (id_R (x) channel^dagger)(X) for an operator X on R (x) B.
ComplexMatrix applyAdjointChannel(const QuantumChannel& ch, const ComplexMatrix& x,
                                  std::size_t ancillaDim);

/// J = (id (x) N)(|Omega><Omega|), |Omega> = d^{-1/2} sum_i |ii>.
ComplexMatrix choiFromKraus(const QuantumChannel& ch);

/// Choi state computed entrywise, J_{(i,b),(j,b')} = N(|i><j|)_{b,b'} / d, as a second route.
ComplexMatrix choiByActionOnUnits(const QuantumChannel& ch);

QuantumChannel tensorPowerChannel(const QuantumChannel& ch, std::size_t l,
                                  std::size_t dimensionCap = kDefaultDimensionCap);

/// p_y = Tr[(id (x) ch)(state) m_y], clipped and renormalized.
RealVector outcomeDistribution(const QuantumChannel& ch, const DensityMatrix& state,
                               std::size_t ancillaDim, const Povm& m);
RealVector outcomeDistribution(const DensityMatrix& state, const Povm& m);

struct DirectionReport {
  bool supportIncluded = false;  // supp(J_i) within supp(J_{1-i})
  std::optional<double> maxDivergence;  // nats, present when finite
};

/// Finiteness of D_max in both directions, judged on the Choi states.
struct FinitenessReport {
  DirectionReport zeroOverOne;  // D_max(N0 || N1)
  DirectionReport oneOverZero;  // D_max(N1 || N0)
  bool bothFinite() const { return zeroOverOne.supportIncluded && oneOverZero.supportIncluded; }
};

FinitenessReport validateChannelPair(const QuantumChannel& n0, const QuantumChannel& n1);

/// Maximally entangled vector on C^d (x) C^d.
ComplexVector maximallyEntangled(std::size_t d);

namespace zoo {

QuantumChannel identity(std::size_t dim);
/// rho -> (1-p) rho + p I/d
QuantumChannel depolarizing(double p, std::size_t dim = 2);
QuantumChannel amplitudeDamping(double gamma);
/// rho -> (1-p) rho + p Z rho Z
QuantumChannel dephasing(double p);
/// rho -> Tr(rho) sigma
QuantumChannel replacer(const DensityMatrix& sigma, std::size_t inDim);
/// Classical channel x -> y with probability stochastic[y][x], acting on the diagonal.
QuantumChannel classical(const std::vector<RealVector>& stochastic);

}  // namespace zoo

namespace random {

using Engine = std::mt19937_64;

ComplexMatrix ginibre(std::size_t rows, std::size_t cols, Engine& rng);
/// Haar isometry (rows >= cols) from Gram-Schmidt on a Ginibre matrix.
ComplexMatrix haarIsometry(std::size_t rows, std::size_t cols, Engine& rng);
ComplexMatrix haarUnitary(std::size_t dim, Engine& rng);
ComplexVector pureState(std::size_t dim, Engine& rng);
/// Hilbert-Schmidt random full-rank density matrix.
DensityMatrix densityMatrix(std::size_t dim, Engine& rng);
/// Stinespring dilation of a Haar isometry; envDim 0 means inDim*outDim (full-rank Choi).
QuantumChannel channel(std::size_t inDim, std::size_t outDim, Engine& rng, std::size_t envDim = 0);
Povm rankOnePvm(std::size_t dim, Engine& rng);

}  // namespace random

}  // namespace seqchan
