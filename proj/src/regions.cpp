#include "seqchan/regions.hpp"

#include <algorithm>
#include <cmath>

#include "seqchan/error.hpp"
#include "seqchan/rng.hpp"

namespace seqchan {

std::string regionKindName(RegionKind k) {
  switch (k) {
    case RegionKind::Rectangle: return "rectangle";
    case RegionKind::Hull: return "hull";
    case RegionKind::ConverseRectangle: return "converseRectangle";
  }
  return "unknown";
}

bool ExponentRegion::contains(ExponentPoint p, double slack) const {
  const double x = std::max(0.0, p.r0 - slack);
  const double y = std::max(0.0, p.r1 - slack);
  if (frontier.empty()) return false;
  const auto& first = frontier.front();
  const auto& last = frontier.back();
  if (x > last.r0 || y > first.r1) return false;
  if (x <= first.r0) return true;
  for (std::size_t k = 0; k + 1 < frontier.size(); ++k) {
    const auto& a = frontier[k];
    const auto& b = frontier[k + 1];
    if (x > b.r0) continue;
    const double t = (x - a.r0) / (b.r0 - a.r0);
    return y <= a.r1 + t * (b.r1 - a.r1) + 1e-12 * std::max(1.0, a.r1);
  }
  return y <= last.r1;
}

ExponentRegion rectangle(ExponentPoint corner, RegionKind kind) {
  if (!(corner.r0 >= 0.0) || !(corner.r1 >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "region corner must be nonnegative");
  ExponentRegion r;
  r.kind = kind;
  r.frontier = {corner};
  return r;
}

namespace {

double cross(const ExponentPoint& o, const ExponentPoint& a, const ExponentPoint& b) {
  return (a.r0 - o.r0) * (b.r1 - o.r1) - (a.r1 - o.r1) * (b.r0 - o.r0);
}

}  // namespace

ExponentRegion hullRegion(const std::vector<ExponentPoint>& points) {
  if (points.empty()) throw Error(ErrorCode::DegenerateSampling, "no points to hull");
  ExponentRegion r;
  r.kind = RegionKind::Hull;
  double maxX = 0.0, maxY = 0.0;
  bool infX = false, infY = false;
  for (const auto& p : points) {
    if (!(p.r0 >= 0.0) || !(p.r1 >= 0.0) || std::isnan(p.r0) || std::isnan(p.r1))
      throw Error(ErrorCode::InvalidArgument, "hull points must be nonnegative");
    infX = infX || std::isinf(p.r0);
    infY = infY || std::isinf(p.r1);
    maxX = std::max(maxX, p.r0);
    maxY = std::max(maxY, p.r1);
  }
  // Mixing with a point at infinity in one coordinate reaches every level of
  // the other coordinate below its maximum, so the closure is a strip.
  if (infX || infY) {
    r.frontier = {{maxX, maxY}};
    return r;
  }
  std::vector<ExponentPoint> pts(points);
  pts.push_back({0.0, maxY});
  pts.push_back({maxX, 0.0});
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.r0 < b.r0 || (a.r0 == b.r0 && a.r1 < b.r1);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  // Upper hull, left to right (monotone chain).
  std::vector<ExponentPoint> upper;
  for (const auto& p : pts) {
    while (upper.size() >= 2 && cross(upper[upper.size() - 2], upper.back(), p) >= 0.0) upper.pop_back();
    upper.push_back(p);
  }
  // Keep the Pareto part: from the last vertex at maximal r1 onward, strictly descending.
  std::size_t start = 0;
  for (std::size_t k = 0; k < upper.size(); ++k)
    if (upper[k].r1 >= upper[start].r1) start = k;
  for (std::size_t k = start; k < upper.size(); ++k)
    if (r.frontier.empty() || upper[k].r1 < r.frontier.back().r1) r.frontier.push_back(upper[k]);
  // A vertical final edge leaves (maxX, 0) behind a higher vertex at the same r0.
  if (r.frontier.size() >= 2 && r.frontier.back().r0 == r.frontier[r.frontier.size() - 2].r0)
    r.frontier.pop_back();
  return r;
}

ContainmentReport containment(const ExponentRegion& a, const ExponentRegion& b, double slack) {
  ContainmentReport rep;
  for (const auto& v : a.frontier)
    if (!b.contains(v, slack)) {
      rep.contained = false;
      rep.violations.push_back(v);
    }
  return rep;
}

namespace {

ComplexVector witnessVector(const DivergenceValue& v) {
  if (!v.witness || !v.witness->inputVector)
    throw Error(ErrorCode::OptimizerFailure, "divergence returned no input witness");
  return *v.witness->inputVector;
}

}  // namespace

ExponentRegion adaptiveRegion(const QuantumChannel& n0, const QuantumChannel& n1, std::size_t l,
                              const OptimizerConfig& cfg, AdaptiveWitnesses* witnesses) {
  const auto r1 = blockDivergence(n0, n1, l, DivergenceSpec::measured(), cfg);
  const auto r0 = blockDivergence(n1, n0, l, DivergenceSpec::measured(), cfg);
  if (witnesses) {
    witnesses->zeroOverOne = {witnessVector(r1.total)};
    witnesses->oneOverZero = {witnessVector(r0.total)};
  }
  ExponentRegion r = rectangle({std::max(0.0, r0.valuePerUse), std::max(0.0, r1.valuePerUse)});
  r.blockSize = l;
  r.bound = BoundDirection::Inner;
  r.label = "adaptive(l=" + std::to_string(l) + ")";
  return r;
}

ExponentRegion adaptiveRegion(const QuantumChannel& n0, const QuantumChannel& n1, std::size_t l,
                              const OptimizerConfig& cfg) {
  return adaptiveRegion(n0, n1, l, cfg, nullptr);
}

ExponentRegion nonAdaptiveRegion(const QuantumChannel& n0, const QuantumChannel& n1,
                                 const SamplingConfig& sampling, const OptimizerConfig& cfg) {
  if (n0.inDim() != n1.inDim() || n0.outDim() != n1.outDim())
    throw Error(ErrorCode::DimensionMismatch, "nonAdaptiveRegion: channel shapes differ");
  ExponentRegion r;
  r.kind = RegionKind::Hull;
  r.label = "nonAdaptive";
  if (n0 == n1 || (n0.choi() - n1.choi()).frobeniusNorm() == 0.0) {
    r.frontier = {{0.0, 0.0}};
    return r;
  }
  const std::size_t dA = n0.inDim();
  const std::size_t dOut = dA * n0.outDim();
  std::vector<ExponentPoint> points;
  auto addPair = [&](const DensityMatrix& input, const Povm& m) {
    const RealVector p0 = outcomeDistribution(n0, input, dA, m);
    const RealVector p1 = outcomeDistribution(n1, input, dA, m);
    points.push_back({klDivergence(p1, p0), klDivergence(p0, p1)});
  };
  if (sampling.includeWitnessArms) {
    for (const auto& [a, b] : {std::pair{&n0, &n1}, std::pair{&n1, &n0}}) {
      const auto v = channelDivergence(*a, *b, DivergenceSpec::measured(), cfg);
      if (v.witness && v.witness->input && v.witness->measurement)
        addPair(*v.witness->input, *v.witness->measurement);
    }
  }
  for (std::size_t i = 0; i < sampling.samples; ++i) {
    random::Engine rng(splitmix64(sampling.seed ^ splitmix64(i)));
    const auto psi = random::pureState(dA * dA, rng);
    addPair(DensityMatrix::pure(psi), random::rankOnePvm(dOut, rng));
  }
  bool informative = false;
  for (const auto& p : points) informative = informative || p.r0 > 0.0 || p.r1 > 0.0;
  if (!informative) throw Error(ErrorCode::DegenerateSampling, "every sampled pair is uninformative");
  ExponentRegion hull = hullRegion(points);
  hull.label = r.label;
  return hull;
}

ExponentRegion converseRegion(const QuantumChannel& n0, const QuantumChannel& n1,
                              const std::vector<double>& alphaGrid, std::size_t l,
                              const OptimizerConfig& cfg, const AdaptiveWitnesses* warmStarts) {
  if (alphaGrid.empty()) throw Error(ErrorCode::InvalidAlpha, "empty alpha grid");
  double c0 = kInfinity, c1 = kInfinity;
  for (double a : alphaGrid) {
    if (!(a > 1.0)) throw Error(ErrorCode::InvalidAlpha, "alpha must exceed 1");
    const auto kind = DivergenceSpec::sandwiched(a);
    std::span<const ComplexVector> w01, w10;
    if (warmStarts) {
      w01 = warmStarts->zeroOverOne;
      w10 = warmStarts->oneOverZero;
    }
    c1 = std::min(c1, blockDivergence(n0, n1, l, kind, cfg, w01).valuePerUse);
    c0 = std::min(c0, blockDivergence(n1, n0, l, kind, cfg, w10).valuePerUse);
  }
  ExponentRegion r = rectangle({std::max(0.0, c0), std::max(0.0, c1)}, RegionKind::ConverseRectangle);
  r.blockSize = l;
  r.alphaGrid = alphaGrid;
  r.bound = BoundDirection::OuterEstimate;
  r.label = "converse estimate(l=" + std::to_string(l) + ")";
  return r;
}

}  // namespace seqchan
