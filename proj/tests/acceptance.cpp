// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>

#include "seqchan/app.hpp"
#include "seqchan/error.hpp"
#include "seqchan/io.hpp"
#include "seqchan/regions.hpp"
#include "seqchan/sim.hpp"

using namespace seqchan;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... xs) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, xs...);
  return buf;
}

double scalarKl(double p, double q) { return p * std::log(p / q) + (1 - p) * std::log((1 - p) / (1 - q)); }

QuantumChannel bernoulliReplacer(double p) {
  const double d[] = {1.0 - p, p};
  return zoo::replacer(DensityMatrix(ComplexMatrix::diagonal(std::span<const double>(d))), 2);
}

const SprtStrategy& classicalStrategy() {
  static const SprtStrategy s = buildSprt(bernoulliReplacer(0.2), bernoulliReplacer(0.8), 400, 0.08);
  return s;
}

Outcome classicalReduction() {
  const auto t0 = std::chrono::steady_clock::now();
  const SprtStrategy& s = classicalStrategy();
  const double kl = scalarKl(0.2, 0.8);
  SimulationPlan plan;
  plan.strategy = s;
  plan.trials = 5000;
  plan.baseSeed = 20230517;
  const auto m = runTrialsSerial(plan);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool rates = std::abs(s.rateZeroOverOne - kl) < 1e-6 && std::abs(s.rateOneOverZero - kl) < 1e-6;
  const bool a = m.alphaHat <= std::exp(-m.thresholdA) + 3 * m.seAlpha && m.betaHat <= std::exp(-m.thresholdB) + 3 * m.seBeta;
  const bool b = m.h0.meanStopTime < 400 && m.h1.meanStopTime < 400;
  const bool c = m.h0.overshootProb < 0.05 && m.h1.overshootProb < 0.05;
  const bool censor = m.censoredCount < 1e-3 * 10000;
  return {rates && a && b && c && censor && secs < 60,
          fmt("rates %.6f/%.6f vs KL %.6f; (a) alpha %.4g beta %.4g %s; (b) E[T] %.1f/%.1f %s; "
              "(c) P(T>n) %.4f/%.4f %s; censored %zu; %.1fs",
              s.rateZeroOverOne, s.rateOneOverZero, kl, m.alphaHat, m.betaHat, a ? "ok" : "FAIL",
              m.h0.meanStopTime, m.h1.meanStopTime, b ? "ok" : "FAIL", m.h0.overshootProb, m.h1.overshootProb,
              c ? "ok" : "FAIL", m.censoredCount, secs)};
}

Outcome orderingSuite() {
  random::Engine rng(101);
  double worst = -kInfinity;
  for (int i = 0; i < 200; ++i) {
    const auto a = random::densityMatrix(2, rng), b = random::densityMatrix(2, rng);
    const double v[] = {measuredRelEntropyStates(a, b).value, relEntropyStates(a, b).value,
                        sandwichedRenyiStates(a, b, 1.5).value, sandwichedRenyiStates(a, b, 2.0).value,
                        maxDivStates(a, b).value};
    for (int k = 0; k + 1 < 5; ++k) worst = std::max(worst, v[k] - v[k + 1]);
  }
  double commuting = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto u = random::haarUnitary(2, rng);
    std::uniform_real_distribution<double> uni(0.02, 0.98);
    const double p = uni(rng), q = uni(rng);
    const double dp[] = {p, 1 - p}, dq[] = {q, 1 - q};
    const DensityMatrix a(u * ComplexMatrix::diagonal(std::span<const double>(dp)) * u.adjoint());
    const DensityMatrix b(u * ComplexMatrix::diagonal(std::span<const double>(dq)) * u.adjoint());
    commuting = std::max(commuting, std::abs(measuredRelEntropyStates(a, b).value - relEntropyStates(a, b).value));
  }
  return {worst <= 1e-6 && commuting <= 1e-5,
          fmt("largest ordering violation %.3g (slack 1e-6); commuting |D_M - D| max %.3g (tol 1e-5)", worst,
              commuting)};
}

Outcome measuredCrossValidation() {
  random::Engine rng(202);
  double gap = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto v = measuredRelEntropyStates(random::densityMatrix(2, rng), random::densityMatrix(2, rng));
    gap = std::max(gap, std::abs(*v.variationalEstimate - *v.pvmEstimate));
  }
  double diag = 0.0;
  std::uniform_real_distribution<double> uni(0.01, 0.99);
  for (int i = 0; i < 50; ++i) {
    const double p = uni(rng), q = uni(rng);
    const double dp[] = {p, 1 - p}, dq[] = {q, 1 - q};
    const auto v = measuredRelEntropyStates(DensityMatrix(ComplexMatrix::diagonal(std::span<const double>(dp))),
                                            DensityMatrix(ComplexMatrix::diagonal(std::span<const double>(dq))));
    const double kl = scalarKl(p, q);
    diag = std::max({diag, std::abs(*v.variationalEstimate - kl), std::abs(*v.pvmEstimate - kl)});
  }
  return {gap <= 1e-4 && diag <= 1e-6,
          fmt("variational vs PVM max gap %.3g (tol 1e-4); diagonal pairs max |est - KL| %.3g (tol 1e-6)", gap, diag)};
}

Outcome maxDivConsistency() {
  random::Engine rng(303);
  double worstMargin = kInfinity, worstMe = 0.0;
  for (int pair = 0; pair < 20; ++pair) {
    const auto n0 = random::channel(2, 2, rng), n1 = random::channel(2, 2, rng);
    const double choi = channelDivergence(n0, n1, DivergenceSpec::maxDiv()).value;
    double best = -kInfinity;
    for (int k = 0; k < 10000; ++k) {
      const DensityMatrix in = k % 2 ? random::densityMatrix(4, rng) : DensityMatrix::pure(random::pureState(4, rng));
      best = std::max(best, maxDivStates(applyChannel(n0, in, 2), applyChannel(n1, in, 2)).value);
    }
    const auto me = DensityMatrix::pure(maximallyEntangled(2));
    const double atMe = maxDivStates(applyChannel(n0, me, 2), applyChannel(n1, me, 2)).value;
    worstMargin = std::min(worstMargin, choi - best);
    worstMe = std::max(worstMe, std::abs(choi - atMe));
  }
  return {worstMargin >= -1e-6 && worstMe <= 1e-3,
          fmt("min (Choi value - best sampled input) %.3g (>= -1e-6); max |Choi - ME input| %.3g (<= 1e-3)",
              worstMargin, worstMe)};
}

Outcome covariantCheck() {
  // (id (x) dep_p)(Phi+) = (1-p) Phi+ + p I/4 has eigenvalue 1 - 3p/4 on Phi+ and p/4 elsewhere,
  // so D(Phi+ || that) = -log(1 - 3p/4).
  const double p = 0.5;
  const double closed = -std::log(1 - 3 * p / 4);
  const auto v = channelDivergence(zoo::identity(2), zoo::depolarizing(p), DivergenceSpec::relEntropy());
  return {std::abs(v.value - closed) <= 1e-3,
          fmt("channel relative entropy %.10f vs closed form %.10f (tol 1e-3)", v.value, closed)};
}

Outcome regionChain() {
  random::Engine rng(606);
  const auto r0 = random::channel(2, 2, rng), r1 = random::channel(2, 2, rng);
  std::string detail;
  bool pass = true;
  for (const auto& [name, n0, n1] : {std::tuple{"identity/depolarizing(0.5)", zoo::identity(2), zoo::depolarizing(0.5)},
                                     std::tuple{"random pair", r0, r1}}) {
    AdaptiveWitnesses w2;
    const auto na = nonAdaptiveRegion(n0, n1);
    const auto a1 = adaptiveRegion(n0, n1, 1);
    const auto a2 = adaptiveRegion(n0, n1, 2, OptimizerConfig{}, &w2);
    const auto cv = converseRegion(n0, n1, {1.05, 1.1, 1.5}, 2, OptimizerConfig{}, &w2);
    const bool c1 = containment(na, a1, 1e-3).contained;
    const bool c2 = containment(a1, a2, 1e-3).contained;
    const bool c3 = containment(a2, cv, 1e-3).contained;
    pass = pass && c1 && c2 && c3;
    const auto corner = [](const ExponentRegion& r) {
      return "(" + io::formatReal(r.frontier.back().r0) + ", " + io::formatReal(r.frontier.front().r1) + ")";
    };
    detail += fmt("%s: na<=a1 %s, a1<=a2 %s, a2<=cv %s [a1 %s a2 %s cv %s]; ", name, c1 ? "ok" : "FAIL",
                  c2 ? "ok" : "FAIL", c3 ? "ok" : "FAIL", corner(a1).c_str(), corner(a2).c_str(), corner(cv).c_str());
  }
  return {pass, detail};
}

Outcome finiteConvergence() {
  const auto r = sweepBudgets(classicalStrategy(), {100, 200, 400, 800}, 5000, 20230517);
  std::string detail;
  bool pass = true;
  for (const auto& rec : r.records) {
    const auto& m = rec.summary;
    const double n = static_cast<double>(rec.n);
    const bool constraints = rec.expectation.pass && rec.probabilistic.pass;
    if (rec.n >= 200) pass = pass && constraints;
    if (rec.n == 800)
      pass = pass && m.exponentAlpha >= 0.85 * m.thresholdA / n && m.exponentBeta >= 0.85 * m.thresholdB / n;
    detail += fmt("n=%zu exp (%.4f, %.4f) vs 0.85*target %.4f, E[T] max %.1f, P(T>n) max %.4f, constraints %s; ",
                  rec.n, m.exponentAlpha, m.exponentBeta, 0.85 * m.thresholdA / n, rec.expectation.worstValue,
                  rec.probabilistic.worstValue, constraints ? "pass" : "fail");
  }
  return {pass, detail + fmt("Spearman %.2f/%.2f", r.spearmanAlpha, r.spearmanBeta)};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "seqchan_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  using io::Json;
  const Json pair{{"n0", {{"zoo", "amplitudeDamping"}, {"gamma", 0.3}}},
                  {"n1", {{"zoo", "random"}, {"inDim", 2}, {"outDim", 2}, {"seed", 4}}}};
  const Json classical{{"n0", {{"zoo", "replacer"}, {"state", {{"diag", {0.8, 0.2}}}}}},
                       {"n1", {{"zoo", "replacer"}, {"state", {{"diag", {0.2, 0.8}}}}}}};
  const Json quick{{"restarts", 4}, {"blockRestarts", 1}};
  const std::vector<std::pair<std::string, Json>> runs{
      {"divergence", {{"channels", pair}, {"optimizer", quick}, {"divergence", {{"kinds", {"relEntropy", "measured", "maxDiv", "sandwiched"}}}}}},
      {"simulate", {{"channels", classical}, {"simulate", {{"n", 200}, {"trials", 500}, {"recordTrials", true}}}}},
      {"sweep", {{"channels", classical}, {"sweep", {{"budgets", {50, 100}}, {"trials", 300}}}}},
      {"regions", {{"channels", pair}, {"optimizer", quick}, {"regions", {{"blockSizes", {1}}, {"converseBlockSize", 1}, {"samples", 64}}}}}};
  std::size_t files = 0;
  std::string bad;
  for (const auto& [cmd, cfg] : runs) {
    const auto cfgPath = (root / (cmd + ".json")).string();
    io::writeTextFile(cfgPath, cfg.dump());
    for (const char* tag : {"a", "b"}) {
      std::ostringstream out, err;
      const int code = app::run({cmd, "--config", cfgPath, "--out", (root / (cmd + tag)).string(), "--seed", "77",
                                 "--no-timestamp"},
                                out, err);
      if (code != 0) bad += cmd + " exited " + std::to_string(code) + " " + err.str();
    }
    for (const auto& f : fs::directory_iterator(root / (cmd + "a"))) {
      ++files;
      if (io::readTextFile(f.path().string()) !=
          io::readTextFile((root / (cmd + "b") / f.path().filename()).string()))
        bad += cmd + "/" + f.path().filename().string() + " differs; ";
    }
  }
  fs::remove_all(root);
  return {bad.empty() && files > 0, fmt("%zu result files compared across 4 commands; %s", files,
                                        bad.empty() ? "all byte-identical" : bad.c_str())};
}

Outcome firstExit() {
  const SprtStrategy& s = classicalStrategy();
  std::size_t checked = 0, failures = 0;
  for (int h = 0; h < 2; ++h)
    for (std::uint64_t trial = 0; trial < 5000; ++trial) {
      CounterRng rng(31337, static_cast<std::uint64_t>(h), trial);
      const auto t = runTrace(s, h, rng, true);
      ++checked;
      // independent replay of the stopping rule from the recorded arms and outcomes
      double sum = 0.0;
      std::size_t stop = 0;
      Decision d = Decision::Continue;
      for (std::size_t k = 0; k < t.steps.size() && d == Decision::Continue; ++k) {
        const Arm& arm = t.steps[k].arm == 0 ? s.armZero : s.armOne;
        sum += arm.llr[t.steps[k].outcome];
        stop = k + 1;
        if (sum >= s.thresholdB) d = Decision::Zero;
        else if (sum <= -s.thresholdA) d = Decision::One;
      }
      if (d == Decision::Continue && t.blockSteps == stepCap(s)) d = Decision::Censored;
      if (stop != t.blockSteps || d != t.decision || sum != t.sum || !firstExitConsistent(s, t)) ++failures;
    }
  return {failures == 0 && checked == 10000, fmt("%zu traces replayed, %zu inconsistent", checked, failures)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"1 classical SPRT reduction", classicalReduction},
      {"2 divergence ordering suite", orderingSuite},
      {"3 measured-entropy cross-validation", measuredCrossValidation},
      {"4 channel max-divergence consistency", maxDivConsistency},
      {"5 covariant-channel optimizer check", covariantCheck},
      {"6 region chain", regionChain},
      {"7 finite-n convergence toward the corner", finiteConvergence},
      {"8 determinism", determinism},
      {"9 first-exit integrity", firstExit},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
