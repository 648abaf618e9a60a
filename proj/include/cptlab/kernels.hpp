#pragma once

// Data-parallel kernels (OpenMP) with serial reference implementations kept
// for testing and benchmarking. Parallel and serial variants return
// identical results: reductions break ties by the lowest index.

#include <functional>
#include <span>
#include <vector>

#include "cptlab/search.hpp"

namespace cptlab::kernels {

/// f at every candidate. `f` must be safe to call concurrently.
std::vector<double> evaluate_batch(const Objective& f, std::span<const Vec> candidates);

/// Compass search from every start; returns the best outcome (lowest start
/// index among equal values) with the evaluation count summed over starts.
SearchOutcome multistart(const Objective& f, std::span<const Vec> starts, const Box& box,
                         const CompassOptions& options);

struct GridMax {
  double x = 0.0;
  double y = 0.0;
  double value = 0.0;
};

/// Maximum of f over the lattice lo + k*step (both axes, endpoints included).
GridMax grid_argmax_2d(const std::function<double(double, double)>& f, double lo, double hi,
                       double step);

/// Number of threads OpenMP would use for the kernels above.
int max_threads();

namespace serial {

std::vector<double> evaluate_batch(const Objective& f, std::span<const Vec> candidates);
SearchOutcome multistart(const Objective& f, std::span<const Vec> starts, const Box& box,
                         const CompassOptions& options);
GridMax grid_argmax_2d(const std::function<double(double, double)>& f, double lo, double hi,
                       double step);

}  // namespace serial
}  // namespace cptlab::kernels
