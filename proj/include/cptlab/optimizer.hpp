#pragma once

// Maximization of V over pure and externally randomized strategies, and the
// coin-gamble randomization ladder M_0 <= M_1 <= ...

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cptlab/choquet.hpp"
#include "cptlab/market.hpp"
#include "cptlab/preferences.hpp"
#include "cptlab/search.hpp"

namespace cptlab {

struct SearchConfig {
  /// Per-node half-width of the box around the sub-hedge. Defaults to
  /// radius_scale * (|X0| + 1).
  std::optional<double> radius;
  double radius_scale = 8.0;
  /// Box doublings allowed when the best point lands on the boundary.
  int max_doublings = 6;
  int multistart = 8;
  double shrink = 0.5;
  /// Smallest compass step, relative to the radius.
  double tolerance = 1e-10;
  std::uint64_t seed = 0;
  std::size_t max_evaluations = 2'000'000;
  /// Random poll directions per failed coordinate sweep (see CompassOptions).
  int random_directions = 16;
  /// Run starts through the OpenMP kernel; results are identical either way.
  bool parallel = true;
};

void validate(const SearchConfig& cfg);

struct PureSearchResult {
  PureStrategy strategy;
  CPTValue value;  // cpt_value re-evaluated at `strategy`
  double radius = 0.0;
  int doublings = 0;
  std::size_t evaluations = 0;
  bool condition_a = false;  // searched outside the well-posedness gate when false
};

/// Multistart compass search over the per-node allocations inside the box
/// |theta - phi|_inf <= radius. The sub-hedge and `extra_starts` (flattened)
/// are always among the starts. No global-optimality claim.
PureSearchResult optimize_pure(const ScenarioTree& tree, const PreferenceSpec& pref, double x0,
                               const ReferenceSpec& ref, const SearchConfig& cfg,
                               std::span<const Vec> extra_starts = {});

struct RandomizedSearchResult {
  RandomizedStrategy strategy;
  CPTValue value;
  double radius = 0.0;
  std::size_t evaluations = 0;
  PureSearchResult pure;  // the 1-atom optimum used as a seed
};

/// Joint search over `atoms` equal-weight pure strategies. One start
/// replicates the pure optimum, so the result is never worse than it.
/// atoms == 1 returns the pure optimum unchanged.
RandomizedSearchResult optimize_randomized(const ScenarioTree& tree, const PreferenceSpec& pref,
                                           double x0, const ReferenceSpec& ref,
                                           std::size_t atoms, const SearchConfig& cfg);

// ---------------------------------------------------------------------------
// Coin-gamble ladder: dS = +-1 fair coin, X0 = B = 0, u+ = x^{1/4}, u- = x.
// A level-n strategy is 2^n equally likely magnitudes |theta|.

struct CoinGambleModel {
  Distortion gain = Distortion::power(0.5);
  Distortion loss = Distortion::identity();
};

struct LadderParts {
  double plus = 0.0;
  double minus = 0.0;
  [[nodiscard]] double value() const { return plus - minus; }
};

/// Exact V+/V- for equally likely magnitudes (any order).
LadderParts ladder_parts(std::span<const double> magnitudes, const CoinGambleModel& model = {});
double ladder_objective(std::span<const double> magnitudes, const CoinGambleModel& model = {});

struct LadderResult {
  std::vector<double> values;                // M_0 .. M_n
  std::vector<std::vector<double>> argmax;   // sorted magnitudes per level
  std::vector<std::size_t> evaluations;
};

inline constexpr int kMaxLadderLevel = 12;

/// Sort-aware coordinate search per level; level k+1 is seeded with the
/// level-k argmax duplicated, so the ladder is nondecreasing.
LadderResult ladder(int n_max, const SearchConfig& cfg, const CoinGambleModel& model = {});

struct PerturbationRow {
  double delta = 0.0;
  double value = 0.0;
  double v_plus = 0.0;
  double v_minus = 0.0;
  double slope = 0.0;  // (value - value(0)) / delta, 0 at delta = 0
};

struct PerturbationTable {
  int level = 0;
  double a = 0.0;           // smallest nonzero magnitude of the level-n argmax
  double mass_a = 0.0;      // P(|theta| = a)
  double mass_above = 0.0;  // P(|theta| > a)
  double derivative = 0.0;  // closed-form d/d delta of V+ at 0
  double base_value = 0.0;
  std::vector<PerturbationRow> rows;
};

/// Splits the atoms at `a` into a + delta / a - delta on a fresh fair coin
/// and evaluates the level-(n+1) objective along `deltas`.
PerturbationTable perturbation_check(const LadderResult& ladder, int level,
                                     std::span<const double> deltas);

}  // namespace cptlab
