#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "seqchan/divergences.hpp"
#include "seqchan/error.hpp"

using namespace seqchan;

namespace {

DensityMatrix diagState(std::vector<double> d) {
  return DensityMatrix(ComplexMatrix::diagonal(std::span<const double>(d)));
}

double scalarKl(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0) s += p[i] * std::log(p[i] / q[i]);
  return s;
}

double scalarRenyi(const std::vector<double>& p, const std::vector<double>& q, double a) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::pow(p[i], a) * std::pow(q[i], 1.0 - a);
  return std::log(s) / (a - 1.0);
}

std::vector<double> randomSimplex(std::size_t n, random::Engine& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(n);
  double s = 0.0;
  for (auto& v : p) s += (v = e(rng) + 1e-3);
  for (auto& v : p) v /= s;
  return p;
}

double traceDistance(const ComplexMatrix& a, const ComplexMatrix& b) {
  double s = 0.0;
  for (double l : hermitianEigen((a - b).hermitianPart()).eigenvalues) s += std::abs(l);
  return 0.5 * s;
}

OptimizerConfig quickConfig() {
  OptimizerConfig cfg;
  cfg.restarts = 4;
  cfg.blockRestarts = 1;
  return cfg;
}

}  // namespace

TEST_SUITE("state divergences") {
  TEST_CASE("relative entropy examples") {
    random::Engine rng(1);
    const auto rho = random::densityMatrix(3, rng);
    CHECK(relEntropyStates(rho, rho).value == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(relEntropyStates(diagState({0.5, 0.5}), diagState({0.25, 0.75})).value ==
          doctest::Approx(0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0)).epsilon(1e-12));
    CHECK(relEntropyStates(diagState({1.0, 0.0}), DensityMatrix::maximallyMixed(2)).value ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }

  TEST_CASE("relative entropy is infinite without support inclusion") {
    const auto v = relEntropyStates(DensityMatrix::maximallyMixed(2), diagState({1.0, 0.0}));
    CHECK_FALSE(v.isFinite);
    CHECK(std::isinf(v.value));
  }

  TEST_CASE("max divergence examples") {
    random::Engine rng(2);
    const auto rho = random::densityMatrix(2, rng);
    CHECK(maxDivStates(rho, rho).value == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(maxDivStates(diagState({1.0, 0.0}), diagState({0.5, 0.5})).value ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK_FALSE(maxDivStates(DensityMatrix::maximallyMixed(2), diagState({1.0, 0.0})).isFinite);
  }

  TEST_CASE("max divergence is the least operator-dominance exponent") {
    random::Engine rng(3);
    for (int trial = 0; trial < 50; ++trial) {
      const auto r0 = random::densityMatrix(2, rng), r1 = random::densityMatrix(2, rng);
      const double g = maxDivStates(r0, r1).value;
      auto minEig = [&](double gamma) {
        return hermitianEigen((Complex{std::exp(gamma), 0.0} * r1.matrix() - r0.matrix()).hermitianPart())
            .eigenvalues.front();
      };
      CHECK(minEig(g + 1e-6) >= -1e-12);
      CHECK(minEig(g - 1e-3) < 0.0);
    }
  }

  TEST_CASE("sandwiched Renyi examples") {
    random::Engine rng(4);
    const auto rho = random::densityMatrix(3, rng);
    for (double a : {1.1, 2.0, 5.0}) CHECK(std::abs(sandwichedRenyiStates(rho, rho, a).value) < 1e-10);
    for (int trial = 0; trial < 20; ++trial) {
      const auto p = randomSimplex(3, rng), q = randomSimplex(3, rng);
      for (double a : {1.05, 1.5, 3.0})
        CHECK(sandwichedRenyiStates(diagState(p), diagState(q), a).value ==
              doctest::Approx(scalarRenyi(p, q, a)).epsilon(1e-10));
    }
    CHECK_THROWS_AS(sandwichedRenyiStates(rho, rho, 1.0), Error);
    try {
      sandwichedRenyiStates(rho, rho, 0.5);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidAlpha);
    }
  }

  TEST_CASE("sandwiched Renyi approaches relative entropy and grows with alpha") {
    random::Engine rng(5);
    for (int trial = 0; trial < 50; ++trial) {
      const auto r0 = random::densityMatrix(2, rng), r1 = random::densityMatrix(2, rng);
      const double d = relEntropyStates(r0, r1).value;
      CHECK(std::abs(sandwichedRenyiStates(r0, r1, 1.001).value - d) <= 1e-2);
      double prev = d;
      for (double a : {1.1, 1.5, 2.0, 3.0}) {
        const double v = sandwichedRenyiStates(r0, r1, a).value;
        CHECK(v >= prev - 1e-9);
        prev = v;
      }
    }
  }

  TEST_CASE("measured relative entropy examples") {
    const auto v = measuredRelEntropyStates(diagState({0.5, 0.5}), diagState({0.25, 0.75}));
    CHECK(v.isLowerBound);
    CHECK(v.value == doctest::Approx(relEntropyStates(diagState({0.5, 0.5}), diagState({0.25, 0.75})).value)
                         .epsilon(1e-8));
    random::Engine rng(6);
    const auto rho = random::densityMatrix(2, rng);
    CHECK(std::abs(measuredRelEntropyStates(rho, rho).value) < 1e-10);
  }

  TEST_CASE("measured relative entropy of |+> against a noisy |0>") {
    const double s = 1.0 / std::sqrt(2.0);
    const ComplexVector plus{s, s};
    const auto r0 = DensityMatrix::pure(plus);
    const auto r1 = diagState({0.8, 0.2});
    const auto m = measuredRelEntropyStates(r0, r1);
    CHECK(m.value <= relEntropyStates(r0, r1).value + 1e-9);
    REQUIRE(m.witness.has_value());
    REQUIRE(m.witness->measurement.has_value());
    const auto p = outcomeDistribution(r0, *m.witness->measurement);
    const auto q = outcomeDistribution(r1, *m.witness->measurement);
    CHECK(klDivergence(p, q) == doctest::Approx(m.value).epsilon(1e-6));
    random::Engine rng(7);
    for (int trial = 0; trial < 200; ++trial) {
      const auto pvm = random::rankOnePvm(2, rng);
      CHECK(m.value >= klDivergence(outcomeDistribution(r0, pvm), outcomeDistribution(r1, pvm)) - 1e-9);
    }
  }

  TEST_CASE("both measured estimators agree on random qutrit pairs") {
    random::Engine rng(8);
    for (int trial = 0; trial < 20; ++trial) {
      const auto r0 = random::densityMatrix(3, rng), r1 = random::densityMatrix(3, rng);
      const auto m = measuredRelEntropyStates(r0, r1);
      CHECK(std::abs(*m.variationalEstimate - *m.pvmEstimate) <= 1e-4);
      CHECK_FALSE(m.warning.has_value());
    }
  }

  TEST_CASE("data processing ordering on random pairs") {
    random::Engine rng(9);
    for (int trial = 0; trial < 50; ++trial) {
      const auto r0 = random::densityMatrix(2, rng), r1 = random::densityMatrix(2, rng);
      const double dm = measuredRelEntropyStates(r0, r1).value;
      const double d = relEntropyStates(r0, r1).value;
      const double s15 = sandwichedRenyiStates(r0, r1, 1.5).value;
      const double s2 = sandwichedRenyiStates(r0, r1, 2.0).value;
      const double dmax = maxDivStates(r0, r1).value;
      CHECK(dm <= d + 1e-6);
      CHECK(d <= s15 + 1e-6);
      CHECK(s15 <= s2 + 1e-6);
      CHECK(s2 <= dmax + 1e-6);
    }
  }

  TEST_CASE("commuting pairs: measured equals relative entropy equals classical KL") {
    random::Engine rng(10);
    for (int trial = 0; trial < 30; ++trial) {
      const auto p = randomSimplex(3, rng), q = randomSimplex(3, rng);
      const auto u = random::haarUnitary(3, rng);
      auto rotate = [&](const std::vector<double>& d) {
        return DensityMatrix(
            (u * ComplexMatrix::diagonal(std::span<const double>(d)) * u.adjoint()).hermitianPart());
      };
      const auto r0 = rotate(p), r1 = rotate(q);
      const double d = relEntropyStates(r0, r1).value;
      CHECK(d == doctest::Approx(scalarKl(p, q)).epsilon(1e-9));
      CHECK(std::abs(measuredRelEntropyStates(r0, r1).value - d) <= 1e-5);
    }
  }

  TEST_CASE("divergences separate distinct states") {
    random::Engine rng(11);
    int tested = 0;
    while (tested < 20) {
      const auto r0 = random::densityMatrix(2, rng), r1 = random::densityMatrix(2, rng);
      if (traceDistance(r0.matrix(), r1.matrix()) < 0.1) continue;
      ++tested;
      CHECK(measuredRelEntropyStates(r0, r1).value >= 1e-4);
      CHECK(relEntropyStates(r0, r1).value >= 1e-4);
      CHECK(sandwichedRenyiStates(r0, r1, 1.5).value >= 1e-4);
      CHECK(maxDivStates(r0, r1).value >= 1e-4);
    }
  }

  TEST_CASE("classical helpers") {
    const std::vector<double> p{0.2, 0.8}, q{0.8, 0.2}, z{1.0, 0.0};
    CHECK(klDivergence(p, q) == doctest::Approx(0.6 * std::log(4.0)));
    CHECK(std::isinf(klDivergence(p, z)));
    CHECK(klDivergence(z, p) == doctest::Approx(std::log(1.0 / 0.2)));
    CHECK(renyiDivergence(p, q, 2.0) == doctest::Approx(scalarRenyi(p, q, 2.0)));
  }
}

TEST_SUITE("channel divergences") {
  TEST_CASE("equal channels give zero for every kind") {
    random::Engine rng(12);
    const auto ch = random::channel(2, 2, rng);
    for (const auto& kind : {DivergenceSpec::relEntropy(), DivergenceSpec::measured(),
                             DivergenceSpec::maxDiv(), DivergenceSpec::sandwiched(1.5)})
      CHECK(std::abs(channelDivergence(ch, ch, kind, quickConfig()).value) < 1e-8);
  }

  TEST_CASE("identity against depolarizing(0.5) reaches the entangled-input value") {
    // (id (x) dep)(Phi+) = 0.5 Phi+ + 0.5 I/4 has eigenvalues 5/8 and 1/8 (x3).
    const double closedForm = -std::log(0.625);
    auto cfg = quickConfig();
    const auto n0 = zoo::identity(2), n1 = zoo::depolarizing(0.5);
    const auto v = channelDivergence(n0, n1, DivergenceSpec::relEntropy(), cfg);
    CHECK(v.isLowerBound);
    CHECK(v.value == doctest::Approx(closedForm).epsilon(1e-3));
    cfg.includeMaximallyEntangled = false;
    cfg.restarts = 8;
    CHECK(channelDivergence(n0, n1, DivergenceSpec::relEntropy(), cfg).value ==
          doctest::Approx(closedForm).epsilon(1e-3));
    // Phi+ is a pure output, so every divergence in this direction agrees.
    CHECK(channelDivergence(n0, n1, DivergenceSpec::measured(), quickConfig()).value ==
          doctest::Approx(closedForm).epsilon(1e-6));
    CHECK(channelDivergence(n0, n1, DivergenceSpec::maxDiv()).value ==
          doctest::Approx(closedForm).epsilon(1e-9));
  }

  TEST_CASE("reverse direction against a rank-one Choi state is infinite") {
    const auto v = channelDivergence(zoo::depolarizing(0.5), zoo::identity(2), DivergenceSpec::measured());
    CHECK_FALSE(v.isFinite);
    CHECK(std::isinf(v.value));
  }

  TEST_CASE("replacer channels reduce to the state divergence") {
    random::Engine rng(13);
    const auto s0 = random::densityMatrix(2, rng), s1 = random::densityMatrix(2, rng);
    const auto n0 = zoo::replacer(s0, 2), n1 = zoo::replacer(s1, 2);
    CHECK(channelDivergence(n0, n1, DivergenceSpec::relEntropy(), quickConfig()).value ==
          doctest::Approx(relEntropyStates(s0, s1).value).epsilon(1e-9));
    CHECK(channelDivergence(n0, n1, DivergenceSpec::sandwiched(2.0), quickConfig()).value ==
          doctest::Approx(sandwichedRenyiStates(s0, s1, 2.0).value).epsilon(1e-9));
    CHECK(channelDivergence(n0, n1, DivergenceSpec::measured(), quickConfig()).value ==
          doctest::Approx(measuredRelEntropyStates(s0, s1).value).epsilon(1e-6));
  }

  TEST_CASE("channel max divergence dominates sampled inputs") {
    random::Engine rng(14);
    for (int pair = 0; pair < 3; ++pair) {
      const auto n0 = random::channel(2, 2, rng), n1 = random::channel(2, 2, rng);
      const auto v = channelDivergence(n0, n1, DivergenceSpec::maxDiv());
      CHECK_FALSE(v.isLowerBound);
      double sampled = 0.0;
      for (int k = 0; k < 1000; ++k) {
        const auto psi = random::pureState(4, rng);
        sampled = std::max(sampled, detail::maxDivergence(applyChannelPure(n0, psi, 2),
                                                          applyChannelPure(n1, psi, 2)));
      }
      CHECK(sampled <= v.value + 1e-6);
      const auto omega = maximallyEntangled(2);
      CHECK(detail::maxDivergence(applyChannelPure(n0, omega, 2), applyChannelPure(n1, omega, 2)) ==
            doctest::Approx(v.value).epsilon(1e-9));
    }
  }

  TEST_CASE("witness reproduces the reported measured value") {
    random::Engine rng(15);
    const auto n0 = random::channel(2, 2, rng), n1 = random::channel(2, 2, rng);
    const auto v = channelDivergence(n0, n1, DivergenceSpec::measured(), quickConfig());
    REQUIRE(v.witness.has_value());
    const auto& w = *v.witness;
    REQUIRE(w.input.has_value());
    REQUIRE(w.measurement.has_value());
    const auto p = outcomeDistribution(n0, *w.input, w.ancillaDim, *w.measurement);
    const auto q = outcomeDistribution(n1, *w.input, w.ancillaDim, *w.measurement);
    CHECK(klDivergence(p, q) == doctest::Approx(v.value).epsilon(1e-6));
    // A measured divergence never exceeds the unmeasured one at the same input.
    CHECK(v.value <= relEntropyStates(applyChannel(n0, *w.input, 2), applyChannel(n1, *w.input, 2)).value +
                         1e-9);
  }

  TEST_CASE("fixed seed gives identical results") {
    random::Engine rng(16);
    const auto n0 = random::channel(2, 2, rng), n1 = random::channel(2, 2, rng);
    const auto a = channelDivergence(n0, n1, DivergenceSpec::sandwiched(1.5), quickConfig());
    const auto b = channelDivergence(n0, n1, DivergenceSpec::sandwiched(1.5), quickConfig());
    CHECK(a.value == b.value);
    CHECK(*a.witness->inputVector == *b.witness->inputVector);
  }

  TEST_CASE("sandwiched alpha must exceed one") {
    try {
      channelDivergence(zoo::identity(2), zoo::identity(2), DivergenceSpec::sandwiched(1.0));
      FAIL("expected InvalidAlpha");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidAlpha);
    }
  }

  TEST_CASE("dimension mismatch") {
    CHECK_THROWS_AS(channelDivergence(zoo::identity(2), zoo::identity(3), DivergenceSpec::relEntropy()),
                    Error);
  }
}

TEST_SUITE("block divergences") {
  TEST_CASE("l = 1 equals the channel divergence") {
    random::Engine rng(17);
    const auto n0 = random::channel(2, 2, rng), n1 = random::channel(2, 2, rng);
    const auto b = blockDivergence(n0, n1, 1, DivergenceSpec::sandwiched(1.5), quickConfig());
    CHECK(b.valuePerUse == channelDivergence(n0, n1, DivergenceSpec::sandwiched(1.5), quickConfig()).value);
  }

  TEST_CASE("replacer channels are additive under relative entropy") {
    random::Engine rng(18);
    const auto s0 = random::densityMatrix(2, rng), s1 = random::densityMatrix(2, rng);
    const auto n0 = zoo::replacer(s0, 2), n1 = zoo::replacer(s1, 2);
    const double perUse = relEntropyStates(s0, s1).value;
    CHECK(blockDivergence(n0, n1, 2, DivergenceSpec::relEntropy(), quickConfig()).valuePerUse ==
          doctest::Approx(perUse).epsilon(1e-8));
  }

  TEST_CASE("measured block value is superadditive") {
    random::Engine rng(19);
    const auto n0 = random::channel(2, 2, rng), n1 = random::channel(2, 2, rng);
    const auto one = blockDivergence(n0, n1, 1, DivergenceSpec::measured(), quickConfig());
    const auto two = blockDivergence(n0, n1, 2, DivergenceSpec::measured(), quickConfig());
    CHECK(two.blockSize == 2);
    CHECK(two.valuePerUse >= one.valuePerUse - 1e-3);
  }

  TEST_CASE("product input layout") {
    const ComplexVector psi{0.6, 0.0, 0.0, 0.8};  // on R (x) A
    const auto v = productInput(psi, 2, 2, 2);
    // v on R1 R2 A1 A2 equals psi (x) psi reordered.
    const std::size_t dims[] = {2, 2, 2, 2}, perm[] = {0, 2, 1, 3};
    ComplexVector pp(16);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) pp[4 * i + j] = psi[i] * psi[j];
    const auto expected = permuteSubsystems(pp, dims, perm);
    for (std::size_t k = 0; k < 16; ++k) CHECK(std::abs(v[k] - expected[k]) < 1e-15);
  }

  TEST_CASE("block size zero is rejected") {
    CHECK_THROWS_AS(blockDivergence(zoo::identity(2), zoo::identity(2), 0, DivergenceSpec::relEntropy()),
                    Error);
  }
}

TEST_CASE("block support threshold follows products of genuine Choi eigenvalues") {
  // Choi eigenvalue 2.9e-5 makes the two-fold power carry eigenvalues near 8.6e-10,
  // below the single-use threshold although the pair is finite.
  random::Engine rng(606);
  const auto a = random::channel(2, 2, rng), b = random::channel(2, 2, rng);
  REQUIRE(hermitianEigen(a.choi()).eigenvalues.front() < 1e-4);
  CHECK(blockSupportTolerance(a, b, 1) == doctest::Approx(kPsdTolerance));
  const double tol2 = blockSupportTolerance(a, b, 2);
  CHECK(tol2 < 1e-12);
  CHECK(tol2 >= 1e-14);
  const auto rel = blockDivergence(b, a, 2, DivergenceSpec::relEntropy(), quickConfig());
  CHECK(rel.total.isFinite);
  const auto mx1 = channelDivergence(b, a, DivergenceSpec::maxDiv());
  const auto mx2 = blockDivergence(b, a, 2, DivergenceSpec::maxDiv());
  CHECK(mx2.total.isFinite);
  // D_max is additive on tensor powers of the Choi states
  CHECK(mx2.valuePerUse == doctest::Approx(mx1.value).epsilon(1e-6));
}

TEST_CASE("product measurement reproduces product outcome laws") {
  random::Engine rng(8);
  const auto ch = random::channel(2, 2, rng);
  const auto psi = random::pureState(4, rng);
  const auto m = random::rankOnePvm(4, rng);
  const auto pm = productMeasurement(m, 2, 2, 2);
  CHECK(pm.outcomeCount() == 16);
  CHECK(pm.isPvm());
  const auto single = outcomeDistribution(ch, DensityMatrix::pure(psi), 2, m);
  const auto joint = outcomeDistribution(tensorPowerChannel(ch, 2), DensityMatrix::pure(productInput(psi, 2, 2, 2)),
                                         4, pm);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(joint[4 * i + j] == doctest::Approx(single[i] * single[j]).epsilon(1e-10));
  CHECK_THROWS_AS(productMeasurement(m, 2, 3, 2), Error);
}

TEST_CASE("block measured value never drops below the single-use value") {
  random::Engine rng(606);
  const auto a = random::channel(2, 2, rng), b = random::channel(2, 2, rng);
  const auto one = channelDivergence(b, a, DivergenceSpec::measured(), quickConfig());
  const auto two = blockDivergence(b, a, 2, DivergenceSpec::measured(), quickConfig());
  CHECK(two.valuePerUse >= one.value - 1e-9);
  // the reported witness attains the reported value
  const auto p0 = tensorPowerChannel(b, 2), p1 = tensorPowerChannel(a, 2);
  const auto& w = *two.total.witness;
  const double kl = klDivergence(outcomeDistribution(p0, *w.input, w.ancillaDim, *w.measurement),
                                 outcomeDistribution(p1, *w.input, w.ancillaDim, *w.measurement));
  CHECK(kl == doctest::Approx(two.total.value).epsilon(1e-6));
}
