#include "cptlab/search.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace cptlab {

Vec Box::clamp(Vec x) const {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
  return x;
}

bool Box::touches_boundary(std::span<const double> x, double rel) const {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double tol = rel * (hi[i] - lo[i]);
    if (x[i] <= lo[i] + tol || x[i] >= hi[i] - tol) return true;
  }
  return false;
}

SearchOutcome compass_search(const Objective& f, Vec start, const Box& box,
                             const CompassOptions& options) {
  require(start.size() == box.size(), "search start has wrong dimension");
  require(options.shrink > 0.0 && options.shrink < 1.0, "shrink factor must lie in (0,1)");
  require(options.initial_step > 0.0 && options.min_step > 0.0, "steps must be > 0");

  require(options.random_directions >= 0, "random direction count must be >= 0");

  SearchOutcome out;
  out.x = box.clamp(std::move(start));
  out.value = f(out.x);
  out.evaluations = 1;
  double step = options.initial_step;
  Vec trial = out.x;
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  Vec u(out.x.size());
  while (step >= options.min_step && out.evaluations < options.max_evaluations) {
    bool improved = false;
    for (std::size_t i = 0; i < out.x.size(); ++i) {
      for (const double dir : {1.0, -1.0}) {
        const double moved = std::clamp(out.x[i] + dir * step, box.lo[i], box.hi[i]);
        if (moved == out.x[i]) continue;
        trial[i] = moved;
        const double value = f(trial);
        ++out.evaluations;
        if (value > out.value) {
          out.x[i] = moved;
          out.value = value;
          improved = true;
          break;
        }
        trial[i] = out.x[i];
      }
    }
    for (int k = 0; !improved && k < options.random_directions; ++k) {
      double norm = 0.0;
      for (auto& d : u) {
        d = normal(rng);
        norm += d * d;
      }
      norm = std::sqrt(norm);
      if (norm == 0.0) continue;
      for (const double sign : {1.0, -1.0}) {
        for (std::size_t i = 0; i < trial.size(); ++i) {
          trial[i] = std::clamp(out.x[i] + sign * step * u[i] / norm, box.lo[i], box.hi[i]);
        }
        if (trial == out.x) continue;
        const double value = f(trial);
        ++out.evaluations;
        if (value > out.value) {
          out.x = trial;
          out.value = value;
          improved = true;
          break;
        }
      }
      trial = out.x;
    }
    if (!improved) step *= options.shrink;
  }
  return out;
}

}  // namespace cptlab
