#include "seqchan/strategies.hpp"

#include <algorithm>
#include <cmath>

#include "seqchan/error.hpp"

namespace seqchan {

Arm makeArm(const QuantumChannel& n0, const QuantumChannel& n1, DensityMatrix input,
            std::size_t ancillaDim, Povm measurement) {
  Arm arm;
  arm.p0 = outcomeDistribution(n0, input, ancillaDim, measurement);
  arm.p1 = outcomeDistribution(n1, input, ancillaDim, measurement);
  arm.llr.resize(arm.p0.size());
  for (std::size_t y = 0; y < arm.p0.size(); ++y) {
    const double a = arm.p0[y], b = arm.p1[y];
    if (a > 0.0 && b > 0.0) arm.llr[y] = std::log(a) - std::log(b);
    else if (a > 0.0) arm.llr[y] = kInfinity;
    else if (b > 0.0) arm.llr[y] = -kInfinity;
    else arm.llr[y] = 0.0;
  }
  arm.input = std::move(input);
  arm.ancillaDim = ancillaDim;
  arm.measurement = std::move(measurement);
  return arm;
}

SprtStrategy NonAdaptiveStrategy::asSprt() const {
  SprtStrategy s;
  s.armZero = arm;
  s.armOne = arm;
  s.rateZeroOverOne = rateZeroOverOne;
  s.rateOneOverZero = rateOneOverZero;
  s.tau = tau;
  s.thresholdA = thresholdA;
  s.thresholdB = thresholdB;
  s.n = n;
  s.blockSize = 1;
  s.adaptive = false;
  return s;
}

double defaultTau(double rateA, double rateB) { return 0.1 * std::min(rateA, rateB); }

void setThresholds(SprtStrategy& s, std::size_t n, std::optional<double> tau) {
  if (!std::isfinite(s.rateZeroOverOne) || !std::isfinite(s.rateOneOverZero))
    throw Error(ErrorCode::InfiniteDivergence, "setThresholds: a witnessed rate is infinite");
  const double minRate = std::min(s.rateZeroOverOne, s.rateOneOverZero);
  const double t = tau.value_or(defaultTau(s.rateZeroOverOne, s.rateOneOverZero));
  if (!(t > 0.0) || !(t < minRate))
    throw Error(ErrorCode::TauTooLarge, "tau = " + std::to_string(t) +
                                            " must lie in (0, " + std::to_string(minRate) + ")");
  if (n < s.blockSize)
    throw Error(ErrorCode::InvalidArgument, "budget n is smaller than the block size");
  s.n = n;
  s.tau = t;
  const double uses = static_cast<double>(s.blockBudget() * s.blockSize);
  s.thresholdA = uses * (s.rateOneOverZero - t);
  s.thresholdB = uses * (s.rateZeroOverOne - t);
}

namespace {

Arm armFromWitness(const QuantumChannel& n0, const QuantumChannel& n1, const DivergenceValue& v) {
  if (!v.witness || !v.witness->input || !v.witness->measurement)
    throw Error(ErrorCode::OptimizerFailure, "measured divergence returned no witness");
  return makeArm(n0, n1, *v.witness->input, v.witness->ancillaDim, *v.witness->measurement);
}

SprtStrategy fromWitnesses(const QuantumChannel& p0, const QuantumChannel& p1,
                           const DivergenceValue& zeroOverOne, const DivergenceValue& oneOverZero,
                           std::size_t l, std::size_t n, std::optional<double> tau) {
  SprtStrategy s;
  s.blockSize = l;
  s.armZero = armFromWitness(p0, p1, zeroOverOne);
  s.armOne = armFromWitness(p0, p1, oneOverZero);
  const double ld = static_cast<double>(l);
  s.rateZeroOverOne = klDivergence(s.armZero.p0, s.armZero.p1) / ld;
  s.rateOneOverZero = klDivergence(s.armOne.p1, s.armOne.p0) / ld;
  setThresholds(s, n, tau);
  return s;
}

void requireFinite(const QuantumChannel& n0, const QuantumChannel& n1) {
  if (!validateChannelPair(n0, n1).bothFinite())
    throw Error(ErrorCode::InfiniteDivergence,
                "channel pair has an infinite max-divergence direction");
}

}  // namespace

SprtStrategy buildSprt(const QuantumChannel& n0, const QuantumChannel& n1, std::size_t n,
                       std::optional<double> tau, const OptimizerConfig& cfg) {
  requireFinite(n0, n1);
  const auto zeroOverOne = channelDivergence(n0, n1, DivergenceSpec::measured(), cfg);
  const auto oneOverZero = channelDivergence(n1, n0, DivergenceSpec::measured(), cfg);
  return fromWitnesses(n0, n1, zeroOverOne, oneOverZero, 1, n, tau);
}

SprtStrategy liftToBlocks(const QuantumChannel& n0, const QuantumChannel& n1, std::size_t l,
                          std::size_t n, std::optional<double> tau, const OptimizerConfig& cfg) {
  if (l == 0) throw Error(ErrorCode::InvalidArgument, "block size must be >= 1");
  if (l == 1) return buildSprt(n0, n1, n, tau, cfg);
  requireFinite(n0, n1);
  const QuantumChannel p0 = tensorPowerChannel(n0, l);
  const QuantumChannel p1 = tensorPowerChannel(n1, l);
  const auto zeroOverOne = blockDivergence(n0, n1, l, DivergenceSpec::measured(), cfg).total;
  const auto oneOverZero = blockDivergence(n1, n0, l, DivergenceSpec::measured(), cfg).total;
  return fromWitnesses(p0, p1, zeroOverOne, oneOverZero, l, n, tau);
}

NonAdaptiveStrategy buildNonAdaptive(const QuantumChannel& n0, const QuantumChannel& n1,
                                     const DensityMatrix& input, std::size_t ancillaDim,
                                     const Povm& m, std::size_t n, std::optional<double> tau) {
  Arm arm = makeArm(n0, n1, input, ancillaDim, m);
  for (double z : arm.llr)
    if (!std::isfinite(z))
      throw Error(ErrorCode::SupportMismatch, "induced outcome laws are not mutually continuous");
  SprtStrategy s;
  s.armZero = arm;
  s.armOne = arm;
  s.adaptive = false;
  s.rateZeroOverOne = klDivergence(arm.p0, arm.p1);
  s.rateOneOverZero = klDivergence(arm.p1, arm.p0);
  setThresholds(s, n, tau);

  NonAdaptiveStrategy out;
  out.arm = std::move(arm);
  out.rateZeroOverOne = s.rateZeroOverOne;
  out.rateOneOverZero = s.rateOneOverZero;
  out.tau = s.tau;
  out.thresholdA = s.thresholdA;
  out.thresholdB = s.thresholdB;
  out.n = n;
  return out;
}

std::size_t stepCap(const SprtStrategy& s) { return 20 * std::max<std::size_t>(1, s.blockBudget()); }

namespace {

std::size_t sample(const RealVector& p, double u) {
  double c = 0.0;
  std::size_t last = 0;
  for (std::size_t y = 0; y < p.size(); ++y) {
    if (p[y] <= 0.0) continue;
    c += p[y];
    last = y;
    if (u < c) return y;
  }
  return last;  // rounding in the tail
}

void advance(const SprtStrategy& s, const RealVector& lawZero, const RealVector& lawOne,
             StrategyTrace& trace, CounterRng& rng, bool record) {
  if (trace.decision != Decision::Continue)
    throw Error(ErrorCode::InvalidArgument, "stepSprt: trace already stopped");
  int armIndex = 0;
  if (s.adaptive) {
    if (trace.blockSteps == 0) armIndex = rng.uniform() < 0.5 ? 0 : 1;
    else armIndex = trace.sum >= 0.0 ? 0 : 1;
  }
  const Arm& arm = armIndex == 0 ? s.armZero : s.armOne;
  const std::size_t y = sample(armIndex == 0 ? lawZero : lawOne, rng.uniform());
  const double z = arm.llr[y];
  if (!std::isfinite(z))
    throw Error(ErrorCode::ZeroProbabilityOutcome,
                "sampled outcome " + std::to_string(y) + " has zero probability under one hypothesis");
  trace.sum += z;
  ++trace.blockSteps;
  if (record) trace.steps.push_back(TraceStep{armIndex, y, z, trace.sum});
  if (trace.sum >= s.thresholdB) trace.decision = Decision::Zero;
  else if (trace.sum <= -s.thresholdA) trace.decision = Decision::One;
  else if (trace.blockSteps >= stepCap(s)) trace.decision = Decision::Censored;
}

}  // namespace

void stepSprt(const SprtStrategy& s, int hypothesis, StrategyTrace& trace, CounterRng& rng,
              bool record) {
  if (hypothesis == 0) advance(s, s.armZero.p0, s.armOne.p0, trace, rng, record);
  else if (hypothesis == 1) advance(s, s.armZero.p1, s.armOne.p1, trace, rng, record);
  else throw Error(ErrorCode::InvalidArgument, "hypothesis must be 0 or 1");
}

void stepSprt(const SprtStrategy& s, const QuantumChannel& trueChannel, StrategyTrace& trace,
              CounterRng& rng) {
  const auto law = [&](const Arm& a) {
    return outcomeDistribution(trueChannel, a.input, a.ancillaDim, a.measurement);
  };
  advance(s, law(s.armZero), law(s.armOne), trace, rng, true);
}

StrategyTrace runTrace(const SprtStrategy& s, int hypothesis, CounterRng& rng, bool record) {
  StrategyTrace trace;
  while (trace.decision == Decision::Continue) stepSprt(s, hypothesis, trace, rng, record);
  return trace;
}

bool firstExitConsistent(const SprtStrategy& s, const StrategyTrace& trace) {
  if (trace.steps.size() != trace.blockSteps || trace.steps.empty()) return false;
  double sum = 0.0;
  for (std::size_t k = 0; k < trace.steps.size(); ++k) {
    sum += trace.steps[k].increment;
    if (sum != trace.steps[k].cumulative) return false;
    const bool inside = sum > -s.thresholdA && sum < s.thresholdB;
    if (k + 1 < trace.steps.size() && !inside) return false;
  }
  if (sum != trace.sum) return false;
  switch (trace.decision) {
    case Decision::Zero: return sum >= s.thresholdB;
    case Decision::One: return sum <= -s.thresholdA && sum < s.thresholdB;
    case Decision::Censored: return sum > -s.thresholdA && sum < s.thresholdB && trace.blockSteps == stepCap(s);
    case Decision::Continue: return false;
  }
  return false;
}

}  // namespace seqchan
