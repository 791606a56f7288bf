#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "seqchan/divergences.hpp"
#include "seqchan/rng.hpp"

namespace seqchan {

/// A fixed (input, measurement) pair with its cached outcome laws.
struct Arm {
  DensityMatrix input;
  std::size_t ancillaDim = 1;
  Povm measurement;
  RealVector p0;   // outcome law when N0 is true
  RealVector p1;   // outcome law when N1 is true
  RealVector llr;  // log p0(y) - log p1(y); +-inf where a law vanishes

  friend bool operator==(const Arm&, const Arm&) = default;
};

Arm makeArm(const QuantumChannel& n0, const QuantumChannel& n1, DensityMatrix input,
            std::size_t ancillaDim, Povm measurement);

/// Sequential test with thresholds (-A, B) on S_k = sum of log-likelihood
/// increments. Adaptive strategies pick armZero when S_{k-1} >= 0 and armOne
/// otherwise, after a fair coin at k = 1; non-adaptive ones use armZero only.
struct SprtStrategy {
  Arm armZero;
  Arm armOne;
  double rateZeroOverOne = 0.0;  // per use, D(P0 || P1) of armZero; sets B
  double rateOneOverZero = 0.0;  // per use, D(P1 || P0) of armOne; sets A
  double tau = 0.0;              // per use
  double thresholdA = 0.0;
  double thresholdB = 0.0;
  std::size_t n = 0;          // budget in channel uses
  std::size_t blockSize = 1;  // channel uses per step
  bool adaptive = true;

  /// Steps available within the budget, floor(n / l).
  std::size_t blockBudget() const { return n / blockSize; }

  friend bool operator==(const SprtStrategy&, const SprtStrategy&) = default;
};

struct NonAdaptiveStrategy {
  Arm arm;
  double rateZeroOverOne = 0.0;
  double rateOneOverZero = 0.0;
  double tau = 0.0;
  double thresholdA = 0.0;
  double thresholdB = 0.0;
  std::size_t n = 0;

  /// The same test expressed as a strategy whose arms coincide.
  SprtStrategy asSprt() const;
};

/// Default slack: a tenth of the smaller rate.
double defaultTau(double rateA, double rateB);

/// A = floor(n/l) * l * (rateOneOverZero - tau), B likewise. Validates tau.
void setThresholds(SprtStrategy& s, std::size_t n, std::optional<double> tau = std::nullopt);

SprtStrategy buildSprt(const QuantumChannel& n0, const QuantumChannel& n1, std::size_t n,
                       std::optional<double> tau = std::nullopt, const OptimizerConfig& cfg = {});

NonAdaptiveStrategy buildNonAdaptive(const QuantumChannel& n0, const QuantumChannel& n1,
                                     const DensityMatrix& input, std::size_t ancillaDim,
                                     const Povm& m, std::size_t n,
                                     std::optional<double> tau = std::nullopt);

/// SPRT on the l-fold tensor powers; rates and tau are reported per use.
SprtStrategy liftToBlocks(const QuantumChannel& n0, const QuantumChannel& n1, std::size_t l,
                          std::size_t n, std::optional<double> tau = std::nullopt,
                          const OptimizerConfig& cfg = {});

enum class Decision { Continue, Zero, One, Censored };

struct TraceStep {
  int arm = 0;  // 0 or 1
  std::size_t outcome = 0;
  double increment = 0.0;
  double cumulative = 0.0;
};

struct StrategyTrace {
  std::vector<TraceStep> steps;  // filled only when recording
  std::size_t blockSteps = 0;
  double sum = 0.0;
  Decision decision = Decision::Continue;

  /// Channel uses consumed, l * block steps.
  std::size_t stoppingTime(const SprtStrategy& s) const { return blockSteps * s.blockSize; }
};

/// Block steps allowed before a trace is censored, 20 * max(1, floor(n/l)).
std::size_t stepCap(const SprtStrategy& s);

/// One step with outcomes drawn from the laws cached for hypothesis 0 or 1.
void stepSprt(const SprtStrategy& s, int hypothesis, StrategyTrace& trace, CounterRng& rng,
              bool record = true);

/// One step with outcomes drawn from an arbitrary channel of matching shape.
void stepSprt(const SprtStrategy& s, const QuantumChannel& trueChannel, StrategyTrace& trace,
              CounterRng& rng);

/// Runs to a decision or the censoring cap.
StrategyTrace runTrace(const SprtStrategy& s, int hypothesis, CounterRng& rng, bool record = false);

/// S_k recomputes from increments and no earlier partial sum left (-A, B).
bool firstExitConsistent(const SprtStrategy& s, const StrategyTrace& trace);

}  // namespace seqchan
