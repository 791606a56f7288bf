#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqchan/quantum.hpp"

namespace seqchan {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class DivergenceKind { RelativeEntropy, Measured, MaxDivergence, SandwichedRenyi };

struct DivergenceSpec {
  DivergenceKind kind = DivergenceKind::RelativeEntropy;
  double alpha = 0.0;  // SandwichedRenyi only

  static DivergenceSpec relEntropy() { return {DivergenceKind::RelativeEntropy, 0.0}; }
  static DivergenceSpec measured() { return {DivergenceKind::Measured, 0.0}; }
  static DivergenceSpec maxDiv() { return {DivergenceKind::MaxDivergence, 0.0}; }
  static DivergenceSpec sandwiched(double alpha) { return {DivergenceKind::SandwichedRenyi, alpha}; }
};

std::string kindName(const DivergenceSpec& spec);
DivergenceSpec parseKind(std::string_view name, double alpha = 0.0);

struct OptimizerConfig {
  int restarts = 16;       // random input restarts for channel optimization (l = 1)
  int blockRestarts = 2;   // random input restarts for tensor-power channels
  int maxIters = 2000;     // local optimizer iterations per start
  int innerMaxIters = 500; // ascent iterations inside measured-entropy estimators
  int pvmRestarts = 4;     // random bases for the PVM-search estimator
  double tolerance = 1e-10;
  double crossCheckTol = 1e-4;
  std::uint64_t seed = 20230517;
  bool includeMaximallyEntangled = true;
};

struct DivergenceWitness {
  std::optional<DensityMatrix> input;
  std::optional<ComplexVector> inputVector;  // pure input on R (x) A
  std::size_t ancillaDim = 1;
  std::optional<Povm> measurement;
};

/// Values are in nats.
struct DivergenceValue {
  double value = 0.0;
  bool isLowerBound = false;
  bool isFinite = true;
  std::optional<DivergenceWitness> witness;
  std::optional<double> variationalEstimate;
  std::optional<double> pvmEstimate;
  std::optional<std::string> warning;

  static DivergenceValue infinite() {
    DivergenceValue v;
    v.value = kInfinity;
    v.isFinite = false;
    return v;
  }
};

struct BlockEstimate {
  std::size_t blockSize = 1;
  double valuePerUse = 0.0;
  DivergenceValue total;
};

/// supp(rho) within supp(sigma). Eigenvalues of sigma at or below `tol` count as kernel.
bool supportIncluded(const ComplexMatrix& rho, const ComplexMatrix& sigma, double tol = kPsdTolerance);

DivergenceValue relEntropyStates(const DensityMatrix& rho0, const DensityMatrix& rho1);
DivergenceValue maxDivStates(const DensityMatrix& rho0, const DensityMatrix& rho1);
DivergenceValue sandwichedRenyiStates(const DensityMatrix& rho0, const DensityMatrix& rho1,
                                      double alpha);
DivergenceValue measuredRelEntropyStates(const DensityMatrix& rho0, const DensityMatrix& rho1,
                                         const OptimizerConfig& cfg = {});

/// Classical KL divergence sum p log(p/q); +inf when p is not absolutely continuous w.r.t. q.
double klDivergence(std::span<const double> p, std::span<const double> q);
/// Classical Renyi divergence of order alpha > 1.
double renyiDivergence(std::span<const double> p, std::span<const double> q, double alpha);

/// Ancilla-assisted channel divergence, maximized over pure inputs on R (x) A with |R| = |A|.
/// `warmStarts` are extra inputs tried alongside the default starts.
DivergenceValue channelDivergence(const QuantumChannel& n0, const QuantumChannel& n1,
                                  const DivergenceSpec& kind, const OptimizerConfig& cfg = {},
                                  std::span<const ComplexVector> warmStarts = {});

/// Divergence of the l-fold tensor powers divided by l. For l > 1 the l-fold
/// product of the single-use witness is added to the starts, and for the
/// measured kind the product of the single-use input and measurement is kept
/// when it beats the joint optimum. Finiteness is
/// decided on the single-use pair, and the powers are evaluated with the
/// support threshold from blockSupportTolerance.
BlockEstimate blockDivergence(const QuantumChannel& n0, const QuantumChannel& n1, std::size_t l,
                              const DivergenceSpec& kind, const OptimizerConfig& cfg = {},
                              std::span<const ComplexVector> warmStarts = {});

/// Support threshold for l-fold tensor powers: kPsdTolerance scaled by the
/// (l-1)th power of the smallest genuine Choi eigenvalue of either channel,
/// floored at 1e-14. Products of genuine eigenvalues stay above it.
double blockSupportTolerance(const QuantumChannel& n0, const QuantumChannel& n1, std::size_t l);

/// |psi>^{(x) l} on (R (x) A)^{(x) l}, reordered to R^{(x) l} (x) A^{(x) l}.
ComplexVector productInput(std::span<const Complex> psi, std::size_t ancillaDim,
                           std::size_t inDim, std::size_t l);

/// l-fold product of a measurement on R (x) B, with effects on R^{(x) l} (x) B^{(x) l}.
Povm productMeasurement(const Povm& m, std::size_t ancillaDim, std::size_t outDim, std::size_t l);

namespace detail {

struct VariationalResult {
  double value = 0.0;
  ComplexMatrix logOmega;  // H with omega = exp(H)
  bool converged = false;
  bool stalled = false;  // stopped short of stationarity with no ascent step left
};

struct VariationalObjective {
  double value = 0.0;
  ComplexMatrix gradient;  // Hermitian
  ComplexMatrix expH;
};

/// Tr[rho H] + 1 - Tr[sigma exp(H)], its gradient in H, and exp(H).
VariationalObjective variationalObjective(const ComplexMatrix& rho, const ComplexMatrix& sigma,
                                          const ComplexMatrix& h);

/// sup_H Tr[rho H] + 1 - Tr[sigma exp(H)] by L-BFGS with eigenvalue polishing.
VariationalResult variationalMeasured(const ComplexMatrix& rho, const ComplexMatrix& sigma,
                                      int maxIters, double tolerance,
                                      const ComplexMatrix* warmStart = nullptr);

struct PvmSearchResult {
  double value = 0.0;
  ComplexMatrix basis;  // columns
};

/// Multi-start Riemannian L-BFGS ascent of KL(P_U || Q_U) over orthonormal bases U.
PvmSearchResult pvmSearch(const ComplexMatrix& rho, const ComplexMatrix& sigma, int maxIters,
                          int randomStarts, std::uint64_t seed, double tolerance);

double basisKl(const ComplexMatrix& rho, const ComplexMatrix& sigma, const ComplexMatrix& basis);

double relEntropy(const ComplexMatrix& rho, const ComplexMatrix& sigma, double supportTol = kPsdTolerance);
double sandwichedRenyi(const ComplexMatrix& rho, const ComplexMatrix& sigma, double alpha,
                       double supportTol = kPsdTolerance);
double maxDivergence(const ComplexMatrix& rho, const ComplexMatrix& sigma, double supportTol = kPsdTolerance);

}  // namespace detail

}  // namespace seqchan
