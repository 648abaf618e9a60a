#pragma once

// Derivative-free maximization on a box: compass (coordinate pattern) search
// with geometric step shrinking, and a multistart driver.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cptlab/market.hpp"

namespace cptlab {

using Objective = std::function<double(std::span<const double>)>;

struct Box {
  Vec lo;
  Vec hi;

  [[nodiscard]] std::size_t size() const { return lo.size(); }
  [[nodiscard]] Vec clamp(Vec x) const;
  /// True when some coordinate sits within `rel` * width of a face.
  [[nodiscard]] bool touches_boundary(std::span<const double> x, double rel = 1e-9) const;
};

struct CompassOptions {
  double initial_step = 1.0;
  double shrink = 0.5;
  double min_step = 1e-10;
  std::size_t max_evaluations = 2'000'000;
  /// Random unit directions polled (both signs) after a failed coordinate
  /// sweep, before the step shrinks. Lets the search follow ridges that are
  /// not axis-aligned.
  int random_directions = 0;
  std::uint64_t seed = 0;
};

struct SearchOutcome {
  Vec x;
  double value = 0.0;
  std::size_t evaluations = 0;
};

/// Accepts a move only on strict improvement; shrinks the step after a
/// coordinate sweep and a random-direction poll both fail. Deterministic
/// given `options.seed`.
SearchOutcome compass_search(const Objective& f, Vec start, const Box& box,
                             const CompassOptions& options);

}  // namespace cptlab
