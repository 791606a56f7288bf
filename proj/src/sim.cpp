#include "seqchan/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seqchan/error.hpp"

namespace seqchan {

double binomialSe(double p, std::size_t trials) {
  if (trials == 0) return 0.0;
  return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(trials));
}

double empiricalExponent(std::size_t count, std::size_t trials, std::size_t n) {
  const double c = count == 0 ? 0.5 : static_cast<double>(count);
  return -std::log(c / static_cast<double>(trials)) / static_cast<double>(n);
}

namespace {

TrialRecord simulateOne(const SprtStrategy& s, int hypothesis, std::size_t trial,
                        std::uint64_t seed) {
  CounterRng rng(seed, static_cast<std::uint64_t>(hypothesis), trial);
  const StrategyTrace t = runTrace(s, hypothesis, rng, false);
  return TrialRecord{hypothesis, trial, t.stoppingTime(s), t.decision, t.sum};
}

// Fixed-order reduction over trial index.
HypothesisStats reduce(const SprtStrategy& s, int hypothesis,
                       const std::vector<TrialRecord>& recs) {
  HypothesisStats h;
  h.trials = recs.size();
  double sumT = 0.0, sumT2 = 0.0, cross = 0.0;
  std::size_t over = 0;
  for (const auto& r : recs) {
    if (r.decision == Decision::Zero) ++h.decidedZero;
    else if (r.decision == Decision::One) ++h.decidedOne;
    else ++h.censored;
    const double t = static_cast<double>(r.stoppingTime);
    sumT += t;
    sumT2 += t * t;
    if (r.stoppingTime > s.n) ++over;
    // Likelihood ratio of the whole trace is exp(S_T) (dP0/dP1).
    if (hypothesis == 1 && r.decision == Decision::One) cross += std::exp(r.finalSum);
    if (hypothesis == 0 && r.decision == Decision::Zero) cross += std::exp(-r.finalSum);
  }
  const double m = static_cast<double>(h.trials);
  h.meanStopTime = sumT / m;
  const double var = h.trials > 1 ? std::max(0.0, (sumT2 - m * h.meanStopTime * h.meanStopTime) / (m - 1.0)) : 0.0;
  h.seStopTime = std::sqrt(var / m);
  h.overshootProb = static_cast<double>(over) / m;
  h.seOvershoot = binomialSe(h.overshootProb, h.trials);
  h.crossErrorEstimate = cross / m;
  return h;
}

SimulationSummary summarize(const SimulationPlan& plan, const std::vector<TrialRecord>& r0,
                            const std::vector<TrialRecord>& r1) {
  const SprtStrategy& s = plan.strategy;
  SimulationSummary out;
  out.n = s.n;
  out.thresholdA = s.thresholdA;
  out.thresholdB = s.thresholdB;
  out.h0 = reduce(s, 0, r0);
  out.h1 = reduce(s, 1, r1);
  const std::size_t alphaCount = out.h0.decidedOne + out.h0.censored;
  const std::size_t betaCount = out.h1.decidedZero + out.h1.censored;
  out.alphaHat = static_cast<double>(alphaCount) / static_cast<double>(plan.trials);
  out.betaHat = static_cast<double>(betaCount) / static_cast<double>(plan.trials);
  out.seAlpha = binomialSe(out.alphaHat, plan.trials);
  out.seBeta = binomialSe(out.betaHat, plan.trials);
  out.exponentAlpha = empiricalExponent(alphaCount, plan.trials, s.n);
  out.exponentBeta = empiricalExponent(betaCount, plan.trials, s.n);
  out.censoredCount = out.h0.censored + out.h1.censored;
  out.waldAlphaHolds = out.alphaHat <= std::exp(-s.thresholdA) + 3.0 * out.seAlpha;
  out.waldBetaHolds = out.betaHat <= std::exp(-s.thresholdB) + 3.0 * out.seBeta;
  const double fraction =
      static_cast<double>(out.censoredCount) / (2.0 * static_cast<double>(plan.trials));
  if (fraction > plan.maxCensoredFraction)
    throw Error(ErrorCode::ExcessiveCensoring,
                "censored fraction " + std::to_string(fraction) + " exceeds " +
                    std::to_string(plan.maxCensoredFraction));
  return out;
}

void validate(const SimulationPlan& plan) {
  if (plan.trials == 0) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
  if (plan.constraint == ConstraintType::Probabilistic && !(plan.epsilon > 0.0 && plan.epsilon < 1.0))
    throw Error(ErrorCode::InvalidArgument, "epsilon must lie in (0, 1)");
  if (plan.strategy.n == 0) throw Error(ErrorCode::InvalidArgument, "strategy has no budget");
}

void emit(std::vector<TrialRecord>* records, const std::vector<TrialRecord>& r0,
          const std::vector<TrialRecord>& r1) {
  if (!records) return;
  records->assign(r0.begin(), r0.end());
  records->insert(records->end(), r1.begin(), r1.end());
}

}  // namespace

SimulationSummary runTrials(const SimulationPlan& plan, std::vector<TrialRecord>* records) {
  validate(plan);
  std::vector<TrialRecord> recs(2 * plan.trials);
  const auto total = static_cast<long>(recs.size());
  const auto trials = static_cast<long>(plan.trials);
  // Exceptions cannot cross the parallel region; keep the first by index.
  std::vector<std::exception_ptr> errors(recs.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (long i = 0; i < total; ++i) {
    const int h = i < trials ? 0 : 1;
    const auto trial = static_cast<std::size_t>(h == 0 ? i : i - trials);
    try {
      recs[static_cast<std::size_t>(i)] = simulateOne(plan.strategy, h, trial, plan.baseSeed);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  const std::vector<TrialRecord> r0(recs.begin(), recs.begin() + trials);
  const std::vector<TrialRecord> r1(recs.begin() + trials, recs.end());
  emit(records, r0, r1);
  return summarize(plan, r0, r1);
}

SimulationSummary runTrialsSerial(const SimulationPlan& plan, std::vector<TrialRecord>* records) {
  validate(plan);
  std::vector<TrialRecord> r0, r1;
  r0.reserve(plan.trials);
  r1.reserve(plan.trials);
  for (std::size_t t = 0; t < plan.trials; ++t) r0.push_back(simulateOne(plan.strategy, 0, t, plan.baseSeed));
  for (std::size_t t = 0; t < plan.trials; ++t) r1.push_back(simulateOne(plan.strategy, 1, t, plan.baseSeed));
  emit(records, r0, r1);
  return summarize(plan, r0, r1);
}

ConstraintReport checkConstraint(const SimulationSummary& summary, ConstraintType type,
                                 double epsilon) {
  ConstraintReport r;
  r.type = type;
  if (type == ConstraintType::Expectation) {
    const bool first = summary.h0.meanStopTime >= summary.h1.meanStopTime;
    const auto& w = first ? summary.h0 : summary.h1;
    r.worstValue = w.meanStopTime;
    r.worstSe = w.seStopTime;
    r.limit = static_cast<double>(summary.n);
    r.margin = r.limit + 3.0 * r.worstSe - r.worstValue;
    r.pass = r.margin >= 0.0;
  } else {
    const bool first = summary.h0.overshootProb >= summary.h1.overshootProb;
    const auto& w = first ? summary.h0 : summary.h1;
    r.worstValue = w.overshootProb;
    r.worstSe = w.seOvershoot;
    r.limit = epsilon;
    r.margin = epsilon - (r.worstValue + 3.0 * r.worstSe);
    r.pass = r.margin > 0.0;
  }
  return r;
}

ConstraintReport checkConstraint(const SimulationSummary& summary, const SimulationPlan& plan) {
  return checkConstraint(summary, plan.constraint, plan.epsilon);
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t m = x.size();
  if (m < 2 || y.size() != m) return 0.0;
  auto ranks = [m](const std::vector<double>& v) {
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(m);
    for (std::size_t i = 0; i < m;) {
      std::size_t j = i;
      while (j + 1 < m && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double mean = 0.5 * static_cast<double>(m + 1);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

SweepResult sweepBudgets(const SprtStrategy& strategy, const std::vector<std::size_t>& budgets,
                         std::size_t trials, std::uint64_t seed, double epsilon) {
  if (budgets.empty()) throw Error(ErrorCode::InvalidArgument, "no budgets given");
  if (!std::is_sorted(budgets.begin(), budgets.end()))
    throw Error(ErrorCode::InvalidArgument, "budgets must be ascending");
  SweepResult out;
  std::vector<double> ns, ea, eb;
  for (std::size_t n : budgets) {
    SimulationPlan plan;
    plan.strategy = strategy;
    setThresholds(plan.strategy, n, strategy.tau);
    plan.trials = trials;
    plan.baseSeed = seed;
    plan.epsilon = epsilon;
    SweepRecord rec;
    rec.n = n;
    rec.summary = runTrials(plan);
    rec.expectation = checkConstraint(rec.summary, ConstraintType::Expectation);
    rec.probabilistic = checkConstraint(rec.summary, ConstraintType::Probabilistic, epsilon);
    ns.push_back(static_cast<double>(n));
    ea.push_back(rec.summary.exponentAlpha);
    eb.push_back(rec.summary.exponentBeta);
    out.records.push_back(std::move(rec));
  }
  out.spearmanAlpha = spearman(ns, ea);
  out.spearmanBeta = spearman(ns, eb);
  return out;
}

}  // namespace seqchan
