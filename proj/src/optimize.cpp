#include "seqchan/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace seqchan::optimize {

LocalResult nelderMead(const Objective& f, std::vector<double> x0, double step,
                       std::size_t maxIterations, double tolerance) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += step;
  std::size_t evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : 1e300;
  };
  for (std::size_t i = 0; i <= n; ++i) values[i] = eval(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  bool converged = false;
  for (std::size_t iter = 0; iter < maxIterations; ++iter) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
    if (std::abs(values[worst] - values[best]) <= tolerance * (1.0 + std::abs(values[best]))) {
      converged = true;
      break;
    }
    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / static_cast<double>(n);

    for (std::size_t k = 0; k < n; ++k) trial[k] = centroid[k] + (centroid[k] - simplex[worst][k]);
    const double reflected = eval(trial);
    if (reflected < values[best]) {
      for (std::size_t k = 0; k < n; ++k)
        trial2[k] = centroid[k] + 2.0 * (centroid[k] - simplex[worst][k]);
      const double expanded = eval(trial2);
      if (expanded < reflected) {
        simplex[worst] = trial2;
        values[worst] = expanded;
      } else {
        simplex[worst] = trial;
        values[worst] = reflected;
      }
      continue;
    }
    if (reflected < values[second]) {
      simplex[worst] = trial;
      values[worst] = reflected;
      continue;
    }
    const bool outside = reflected < values[worst];
    for (std::size_t k = 0; k < n; ++k)
      trial2[k] = outside ? centroid[k] + 0.5 * (trial[k] - centroid[k])
                          : centroid[k] + 0.5 * (simplex[worst][k] - centroid[k]);
    const double contracted = eval(trial2);
    if (contracted < std::min(reflected, values[worst])) {
      simplex[worst] = trial2;
      values[worst] = contracted;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t k = 0; k < n; ++k)
        simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
      values[i] = eval(simplex[i]);
    }
  }
  const auto bestIt = std::min_element(values.begin(), values.end());
  const auto idx = static_cast<std::size_t>(bestIt - values.begin());
  return LocalResult{simplex[idx], values[idx], evals, converged};
}

LocalResult coordinateRefine(const Objective& f, std::vector<double> x, double step,
                             double minStep, std::size_t maxEvaluations) {
  double fx = f(x);
  std::size_t evals = 1;
  while (step >= minStep && evals < maxEvaluations) {
    bool improved = false;
    for (std::size_t k = 0; k < x.size() && evals < maxEvaluations; ++k) {
      for (double dir : {1.0, -1.0}) {
        const double saved = x[k];
        x[k] = saved + dir * step;
        const double v = f(x);
        ++evals;
        if (v < fx) {
          fx = v;
          improved = true;
          break;
        }
        x[k] = saved;
      }
    }
    if (!improved) step *= 0.5;
  }
  return LocalResult{std::move(x), fx, evals, step < minStep};
}

}  // namespace seqchan::optimize

namespace seqchan::optimize {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

LocalResult lbfgs(const ObjectiveWithGradient& f, std::vector<double> x0,
                  std::size_t maxIterations, double gradTol, std::size_t memory) {
  const std::size_t n = x0.size();
  std::vector<double> x = std::move(x0), g(n), gNext(n), trial(n), d(n);
  double fx = f(x, g);
  std::size_t evals = 1;
  std::deque<std::pair<std::vector<double>, std::vector<double>>> pairs;  // (s, y)
  double gnorm = std::sqrt(dot(g, g));
  int stall = 0;
  for (std::size_t iter = 0; iter < maxIterations && gnorm > gradTol; ++iter) {
    for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
    std::vector<double> alphas(pairs.size());
    for (std::size_t k = pairs.size(); k-- > 0;) {
      const auto& [s, y] = pairs[k];
      alphas[k] = dot(s, d) / dot(s, y);
      for (std::size_t i = 0; i < n; ++i) d[i] -= alphas[k] * y[i];
    }
    const double scale = pairs.empty() ? std::min(1.0, 1.0 / gnorm)
                                       : dot(pairs.back().first, pairs.back().second) /
                                             dot(pairs.back().second, pairs.back().second);
    for (double& v : d) v *= scale;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto& [s, y] = pairs[k];
      const double beta = dot(y, d) / dot(s, y);
      for (std::size_t i = 0; i < n; ++i) d[i] += (alphas[k] - beta) * s[i];
    }
    double slope = dot(g, d);
    if (!(slope < 0.0)) {
      pairs.clear();
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i] * std::min(1.0, 1.0 / gnorm);
      slope = dot(g, d);
    }
    double t = 1.0, fNext = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls, t *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + t * d[i];
      fNext = f(trial, gNext);
      ++evals;
      if (std::isfinite(fNext) && fNext <= fx + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (pairs.empty()) break;
      pairs.clear();
      continue;
    }
    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = trial[i] - x[i];
      y[i] = gNext[i] - g[i];
    }
    if (dot(s, y) > 1e-300) {
      pairs.emplace_back(std::move(s), std::move(y));
      if (pairs.size() > memory) pairs.pop_front();
    }
    stall = (fx - fNext <= 1e-15 * (1.0 + std::abs(fx))) ? stall + 1 : 0;
    x.swap(trial);
    g.swap(gNext);
    fx = fNext;
    gnorm = std::sqrt(dot(g, g));
    if (stall >= 5) break;
  }
  return LocalResult{std::move(x), fx, evals, gnorm <= gradTol};
}

}  // namespace seqchan::optimize
