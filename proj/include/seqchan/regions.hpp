#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seqchan/divergences.hpp"

namespace seqchan {

/// Exponent pair (R0, R1) in nats per channel use. Coordinates may be +inf.
struct ExponentPoint {
  double r0 = 0.0;
  double r1 = 0.0;
  friend bool operator==(const ExponentPoint&, const ExponentPoint&) = default;
};

enum class RegionKind { Rectangle, Hull, ConverseRectangle };
enum class BoundDirection { Inner, OuterEstimate };

/// Down-closed region in the nonnegative quadrant stored as its Pareto
/// frontier: r0 ascending, r1 strictly descending. Rectangles have a single
/// vertex; hulls are the concave chain through their vertices. An infinite
/// coordinate is allowed and only on a single-vertex frontier (a strip).
struct ExponentRegion {
  RegionKind kind = RegionKind::Rectangle;
  std::vector<ExponentPoint> frontier;
  std::size_t blockSize = 1;
  std::vector<double> alphaGrid;
  BoundDirection bound = BoundDirection::Inner;
  std::string label;

  bool contains(ExponentPoint p, double slack = 0.0) const;

  friend bool operator==(const ExponentRegion&, const ExponentRegion&) = default;
};

std::string regionKindName(RegionKind k);

ExponentRegion rectangle(ExponentPoint corner, RegionKind kind = RegionKind::Rectangle);

/// Frontier of the down-closure of the convex hull of `points`.
ExponentRegion hullRegion(const std::vector<ExponentPoint>& points);

struct ContainmentReport {
  bool contained = true;
  std::vector<ExponentPoint> violations;  // vertices of a outside b
};

/// Every vertex of a lies in b after shifting it down by `slack` per coordinate.
ContainmentReport containment(const ExponentRegion& a, const ExponentRegion& b, double slack);

struct SamplingConfig {
  std::size_t samples = 512;
  std::uint64_t seed = 7;
  bool includeWitnessArms = true;
};

/// Rectangle at (D_M(N1^l || N0^l)/l, D_M(N0^l || N1^l)/l). A direction with
/// unbounded max-divergence yields an infinite coordinate.
ExponentRegion adaptiveRegion(const QuantumChannel& n0, const QuantumChannel& n1, std::size_t l,
                              const OptimizerConfig& cfg = {});

/// Inputs achieving the two corner coordinates of an adaptive region, so
/// callers can warm-start other optimizations. `zeroOverOne` is for N0 || N1.
struct AdaptiveWitnesses {
  std::vector<ComplexVector> zeroOverOne;
  std::vector<ComplexVector> oneOverZero;
};

ExponentRegion adaptiveRegion(const QuantumChannel& n0, const QuantumChannel& n1, std::size_t l,
                              const OptimizerConfig& cfg, AdaptiveWitnesses* witnesses);

/// Down-closed hull of classical KL pairs (D(P1||P0), D(P0||P1)) from sampled
/// pure inputs and rank-one PVMs, plus both measured-divergence witness arms.
ExponentRegion nonAdaptiveRegion(const QuantumChannel& n0, const QuantumChannel& n1,
                                 const SamplingConfig& sampling = {},
                                 const OptimizerConfig& cfg = {});

/// Rectangle at the grid minimum of block sandwiched Renyi values per use.
/// Labelled an estimate: finite-l values approximate the regularized limit.
ExponentRegion converseRegion(const QuantumChannel& n0, const QuantumChannel& n1,
                              const std::vector<double>& alphaGrid, std::size_t l,
                              const OptimizerConfig& cfg = {},
                              const AdaptiveWitnesses* warmStarts = nullptr);

}  // namespace seqchan
