#pragma once

#include <cstdint>
#include <vector>

#include "seqchan/strategies.hpp"

namespace seqchan {

enum class ConstraintType { Expectation, Probabilistic };

struct SimulationPlan {
  SprtStrategy strategy;
  std::size_t trials = 1000;  // per hypothesis
  std::uint64_t baseSeed = 1;
  ConstraintType constraint = ConstraintType::Expectation;
  double epsilon = 0.05;  // probabilistic constraint level
  double maxCensoredFraction = 0.05;
};

/// Per-trial record; stopping time is in channel uses.
struct TrialRecord {
  int hypothesis = 0;
  std::size_t trial = 0;
  std::size_t stoppingTime = 0;
  Decision decision = Decision::Continue;
  double finalSum = 0.0;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

struct HypothesisStats {
  std::size_t trials = 0;
  std::size_t decidedZero = 0;
  std::size_t decidedOne = 0;
  std::size_t censored = 0;
  double meanStopTime = 0.0;
  double seStopTime = 0.0;
  double overshootProb = 0.0;  // P(T > n)
  double seOvershoot = 0.0;
  /// Change-of-measure estimate of the other hypothesis' error from these
  /// traces, E[1{d = wrong for other} exp(-+S_T)]. Informational only.
  double crossErrorEstimate = 0.0;

  friend bool operator==(const HypothesisStats&, const HypothesisStats&) = default;
};

struct SimulationSummary {
  std::size_t n = 0;
  double thresholdA = 0.0;
  double thresholdB = 0.0;
  HypothesisStats h0;
  HypothesisStats h1;
  double alphaHat = 0.0;  // P_0(d != 0), censored counted as errors
  double betaHat = 0.0;   // P_1(d != 1)
  double seAlpha = 0.0;
  double seBeta = 0.0;
  double exponentAlpha = 0.0;  // -(1/n) log alphaHat, continuity-corrected at zero
  double exponentBeta = 0.0;
  std::size_t censoredCount = 0;
  bool waldAlphaHolds = false;  // alphaHat <= e^{-A} + 3 SE
  bool waldBetaHolds = false;

  friend bool operator==(const SimulationSummary&, const SimulationSummary&) = default;
};

/// Binomial standard error sqrt(p (1 - p) / trials).
double binomialSe(double p, std::size_t trials);

/// -(1/n) log(count / trials), with count 0 replaced by 1/2.
double empiricalExponent(std::size_t count, std::size_t trials, std::size_t n);

/// Parallel over trials; results do not depend on scheduling.
SimulationSummary runTrials(const SimulationPlan& plan, std::vector<TrialRecord>* records = nullptr);

/// Single-threaded reference with the same streams and reduction order.
SimulationSummary runTrialsSerial(const SimulationPlan& plan,
                                  std::vector<TrialRecord>* records = nullptr);

struct ConstraintReport {
  ConstraintType type = ConstraintType::Expectation;
  bool pass = false;
  double worstValue = 0.0;  // max_i mean T_i, or max_i P_i(T > n)
  double worstSe = 0.0;
  double limit = 0.0;       // n, or epsilon
  double margin = 0.0;      // limit - (worst + 3 SE); >= 0 on pass for the expectation form
};

ConstraintReport checkConstraint(const SimulationSummary& summary, const SimulationPlan& plan);
ConstraintReport checkConstraint(const SimulationSummary& summary, ConstraintType type,
                                 double epsilon = 0.05);

struct SweepRecord {
  std::size_t n = 0;
  SimulationSummary summary;
  ConstraintReport expectation;
  ConstraintReport probabilistic;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  double spearmanAlpha = 0.0;  // rank correlation of exponentAlpha with n
  double spearmanBeta = 0.0;
};

/// Re-thresholds `strategy` for each budget (ascending) and simulates it.
SweepResult sweepBudgets(const SprtStrategy& strategy, const std::vector<std::size_t>& budgets,
                         std::size_t trials, std::uint64_t seed, double epsilon = 0.05);

/// Spearman rank correlation with average ranks for ties; 0 for fewer than two points.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace seqchan
