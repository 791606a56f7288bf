#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace seqchan::optimize {

using Objective = std::function<double(const std::vector<double>&)>;

struct LocalResult {
  std::vector<double> x;
  double value = 0.0;  // minimized objective
  std::size_t evaluations = 0;
  bool converged = false;
};

/// Nelder-Mead simplex minimization (reflection 1, expansion 2, contraction
/// 1/2, shrink 1/2) started from an axis-aligned simplex of edge `step`.
LocalResult nelderMead(const Objective& f, std::vector<double> x0, double step,
                       std::size_t maxIterations, double tolerance);

/// Compass search along each coordinate, halving the step until it falls below
/// minStep.
LocalResult coordinateRefine(const Objective& f, std::vector<double> x, double step,
                             double minStep, std::size_t maxEvaluations);

/// Fills `grad` with the gradient at x and returns f(x).
using ObjectiveWithGradient = std::function<double(const std::vector<double>&, std::vector<double>&)>;

/// Limited-memory BFGS minimization with Armijo backtracking. Stops when the
/// gradient norm drops below gradTol or progress stalls.
LocalResult lbfgs(const ObjectiveWithGradient& f, std::vector<double> x0,
                  std::size_t maxIterations, double gradTol, std::size_t memory = 8);

}  // namespace seqchan::optimize
