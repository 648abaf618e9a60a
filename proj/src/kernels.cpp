#include "cptlab/kernels.hpp"

#include <omp.h>

#include <cmath>
#include <cstdint>
#include <limits>

namespace cptlab::kernels {

namespace {

struct Best {
  double value = -std::numeric_limits<double>::infinity();
  std::int64_t index = -1;
};

bool better(const Best& a, const Best& b) {
  if (a.index < 0) return false;
  if (b.index < 0) return true;
  return a.value > b.value || (a.value == b.value && a.index < b.index);
}

std::int64_t lattice_size(double lo, double hi, double step) {
  require(hi >= lo && step > 0.0, "grid needs lo <= hi and step > 0");
  return static_cast<std::int64_t>(std::floor((hi - lo) / step + 0.5)) + 1;
}

double lattice_point(double lo, double hi, double step, std::int64_t k) {
  return std::min(lo + static_cast<double>(k) * step, hi);
}

}  // namespace

int max_threads() { return omp_get_max_threads(); }

std::vector<double> evaluate_batch(const Objective& f, std::span<const Vec> candidates) {
  std::vector<double> out(candidates.size());
  const auto n = static_cast<std::int64_t>(candidates.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = f(candidates[static_cast<std::size_t>(i)]);
  return out;
}

SearchOutcome multistart(const Objective& f, std::span<const Vec> starts, const Box& box,
                         const CompassOptions& options) {
  require(!starts.empty(), "multistart needs at least one start");
  std::vector<SearchOutcome> runs(starts.size());
  const auto n = static_cast<std::int64_t>(starts.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    runs[static_cast<std::size_t>(i)] = compass_search(f, starts[static_cast<std::size_t>(i)], box, options);
  }
  std::size_t best = 0;
  std::size_t evaluations = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    evaluations += runs[i].evaluations;
    if (runs[i].value > runs[best].value) best = i;
  }
  SearchOutcome out = std::move(runs[best]);
  out.evaluations = evaluations;
  return out;
}

GridMax grid_argmax_2d(const std::function<double(double, double)>& f, double lo, double hi,
                       double step) {
  const std::int64_t n = lattice_size(lo, hi, step);
  Best global;
#pragma omp parallel
  {
    Best local;
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      const double x = lattice_point(lo, hi, step, i);
      for (std::int64_t j = 0; j < n; ++j) {
        const Best cand{f(x, lattice_point(lo, hi, step, j)), i * n + j};
        if (better(cand, local)) local = cand;
      }
    }
#pragma omp critical
    if (better(local, global)) global = local;
  }
  return {lattice_point(lo, hi, step, global.index / n), lattice_point(lo, hi, step, global.index % n),
          global.value};
}

namespace serial {

std::vector<double> evaluate_batch(const Objective& f, std::span<const Vec> candidates) {
  std::vector<double> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) out.push_back(f(c));
  return out;
}

SearchOutcome multistart(const Objective& f, std::span<const Vec> starts, const Box& box,
                         const CompassOptions& options) {
  require(!starts.empty(), "multistart needs at least one start");
  SearchOutcome best;
  std::size_t evaluations = 0;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    SearchOutcome run = compass_search(f, starts[i], box, options);
    evaluations += run.evaluations;
    if (i == 0 || run.value > best.value) best = std::move(run);
  }
  best.evaluations = evaluations;
  return best;
}

GridMax grid_argmax_2d(const std::function<double(double, double)>& f, double lo, double hi,
                       double step) {
  const std::int64_t n = lattice_size(lo, hi, step);
  Best best;
  for (std::int64_t i = 0; i < n; ++i) {
    const double x = lattice_point(lo, hi, step, i);
    for (std::int64_t j = 0; j < n; ++j) {
      const Best cand{f(x, lattice_point(lo, hi, step, j)), i * n + j};
      if (better(cand, best)) best = cand;
    }
  }
  return {lattice_point(lo, hi, step, best.index / n), lattice_point(lo, hi, step, best.index % n),
          best.value};
}

}  // namespace serial
}  // namespace cptlab::kernels
