#include "cptlab/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cptlab/format.hpp"
#include "cptlab/kernels.hpp"

namespace cptlab {

void validate(const SearchConfig& cfg) {
  if (cfg.radius) require(std::isfinite(*cfg.radius) && *cfg.radius > 0.0, "radius must be > 0");
  require(std::isfinite(cfg.radius_scale) && cfg.radius_scale > 0.0, "radius scale must be > 0");
  require(cfg.max_doublings >= 0, "max doublings must be >= 0");
  require(cfg.multistart >= 1, "multistart must be >= 1");
  require(cfg.shrink > 0.0 && cfg.shrink < 1.0, "shrink must lie in (0,1)");
  require(cfg.tolerance > 0.0 && cfg.tolerance < 1.0, "tolerance must lie in (0,1)");
  require(cfg.max_evaluations > 0, "max evaluations must be > 0");
  require(cfg.random_directions >= 0, "random directions must be >= 0");
}

namespace {

double initial_radius(const SearchConfig& cfg, double x0) {
  return cfg.radius ? *cfg.radius : cfg.radius_scale * (std::abs(x0) + 1.0);
}

Box box_around(const Vec& centre, double radius) {
  Box box{centre, centre};
  for (std::size_t k = 0; k < centre.size(); ++k) {
    box.lo[k] -= radius;
    box.hi[k] += radius;
  }
  return box;
}

CompassOptions compass_options(const SearchConfig& cfg, double radius) {
  CompassOptions o;
  o.initial_step = 0.25 * radius;
  o.shrink = cfg.shrink;
  o.min_step = cfg.tolerance * radius;
  o.max_evaluations = cfg.max_evaluations;
  o.random_directions = cfg.random_directions;
  o.seed = cfg.seed;
  return o;
}

Objective guarded(std::function<double(std::span<const double>)> f) {
  return [f = std::move(f)](std::span<const double> x) {
    const double v = f(x);
    if (!std::isfinite(v)) throw InternalError("objective is not finite during search");
    return v;
  };
}

// Runs the multistart search, doubling the box while the winner sits on
// its boundary. `starts` seeds the first round; later rounds warm-start from
// the previous winner plus the original starts, clamped.
struct BoxedRun {
  SearchOutcome best;
  double radius = 0.0;
  int doublings = 0;
  std::size_t evaluations = 0;
};

BoxedRun boxed_search(const Objective& f, const Vec& centre, std::vector<Vec> starts,
                      double radius, const SearchConfig& cfg) {
  BoxedRun run;
  run.radius = radius;
  for (;;) {
    const Box box = box_around(centre, run.radius);
    std::vector<Vec> clamped;
    clamped.reserve(starts.size());
    for (const auto& s : starts) clamped.push_back(box.clamp(s));
    const CompassOptions opts = compass_options(cfg, run.radius);
    SearchOutcome out = cfg.parallel ? kernels::multistart(f, clamped, box, opts)
                                     : kernels::serial::multistart(f, clamped, box, opts);
    run.evaluations += out.evaluations;
    if (run.doublings == 0 || out.value > run.best.value) run.best = out;
    if (run.doublings >= cfg.max_doublings || !box.touches_boundary(run.best.x)) break;
    run.radius *= 2.0;
    ++run.doublings;
    starts.insert(starts.begin(), run.best.x);
  }
  run.best.evaluations = run.evaluations;
  return run;
}

std::vector<Vec> random_starts(const Vec& centre, double radius, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Vec> out;
  for (int s = 0; s < count; ++s) {
    Vec x = centre;
    for (auto& v : x) v += radius * unit(rng);
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace

PureSearchResult optimize_pure(const ScenarioTree& tree, const PreferenceSpec& pref, double x0,
                               const ReferenceSpec& ref, const SearchConfig& cfg,
                               std::span<const Vec> extra_starts) {
  validate(cfg);
  require(validate_subhedge(tree, ref), "sub-hedge exceeds the reference point at some leaf");
  const CptEvaluator eval(tree, x0, ref, pref);
  const Vec centre = flatten(tree, ref.subhedge);
  const double radius = initial_radius(cfg, x0);

  std::vector<Vec> starts{centre};
  for (const auto& s : extra_starts) {
    require(s.size() == centre.size(), "extra start has wrong length");
    starts.push_back(s);
  }
  const int missing = cfg.multistart - static_cast<int>(starts.size());
  for (auto& s : random_starts(centre, radius, std::max(missing, 0), cfg.seed)) {
    starts.push_back(std::move(s));
  }

  const Objective f = guarded([&eval](std::span<const double> x) { return eval.value(x); });
  const BoxedRun run = boxed_search(f, centre, std::move(starts), radius, cfg);

  PureSearchResult r;
  r.strategy = unflatten(tree, run.best.x);
  r.value = cpt_value(tree, r.strategy, x0, ref, pref);
  r.radius = run.radius;
  r.doublings = run.doublings;
  r.evaluations = run.evaluations;
  r.condition_a = check_conditions(pref).condition_a;
  return r;
}

RandomizedSearchResult optimize_randomized(const ScenarioTree& tree, const PreferenceSpec& pref,
                                           double x0, const ReferenceSpec& ref,
                                           std::size_t atoms, const SearchConfig& cfg) {
  require(atoms >= 1, "randomized search needs at least one atom");
  RandomizedSearchResult r;
  r.pure = optimize_pure(tree, pref, x0, ref, cfg);
  if (atoms == 1) {
    r.strategy.atoms.emplace_back(1.0, r.pure.strategy);
    r.value = r.pure.value;
    r.radius = r.pure.radius;
    r.evaluations = r.pure.evaluations;
    return r;
  }

  const CptEvaluator eval(tree, x0, ref, pref);
  const std::size_t dim = eval.dimension();
  const Vec phi = flatten(tree, ref.subhedge);
  const Vec best_pure = flatten(tree, r.pure.strategy);
  Vec centre;
  Vec replicated;
  for (std::size_t a = 0; a < atoms; ++a) {
    centre.insert(centre.end(), phi.begin(), phi.end());
    replicated.insert(replicated.end(), best_pure.begin(), best_pure.end());
  }

  std::vector<Vec> starts{replicated};
  // Spread copies of the pure optimum, then uniform draws in the box.
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double radius = r.pure.radius;
  const double spread = 0.05 * radius;
  const int half = std::max(cfg.multistart / 2, 1);
  for (int s = 1; s < half; ++s) {
    Vec x = replicated;
    for (std::size_t k = dim; k < x.size(); ++k) x[k] += spread * noise(rng);
    starts.push_back(std::move(x));
  }
  const int missing = cfg.multistart - static_cast<int>(starts.size());
  for (auto& s : random_starts(centre, radius, std::max(missing, 0), cfg.seed + 1)) {
    starts.push_back(std::move(s));
  }

  const Objective f = guarded(
      [&eval, atoms](std::span<const double> x) { return eval.mixture_value(x, atoms); });
  SearchConfig inner = cfg;
  inner.radius = radius;
  const BoxedRun run = boxed_search(f, centre, std::move(starts), radius, inner);

  const double w = 1.0 / static_cast<double>(atoms);
  for (std::size_t a = 0; a < atoms; ++a) {
    r.strategy.atoms.emplace_back(
        w, unflatten(tree, std::span<const double>(run.best.x).subspan(a * dim, dim)));
  }
  r.value = cpt_value(tree, r.strategy, x0, ref, pref);
  r.radius = run.radius;
  r.evaluations = r.pure.evaluations + run.evaluations;
  return r;
}

// ---------------------------------------------------------------------------

LadderParts ladder_parts(std::span<const double> magnitudes, const CoinGambleModel& model) {
  require(!magnitudes.empty(), "ladder strategy needs at least one atom");
  const double p = 0.5 / static_cast<double>(magnitudes.size());
  std::vector<Atom> gains;
  std::vector<Atom> losses;
  for (double b : magnitudes) {
    require(std::isfinite(b) && b >= 0.0, "ladder magnitudes must be finite and >= 0");
    if (b == 0.0) continue;
    gains.push_back({std::sqrt(std::sqrt(b)), p});
    losses.push_back({b, p});
  }
  return {choquet_sum(gains, model.gain), choquet_sum(losses, model.loss)};
}

double ladder_objective(std::span<const double> magnitudes, const CoinGambleModel& model) {
  return ladder_parts(magnitudes, model).value();
}

namespace {

// Objective over sorted magnitudes: sum_i cp_i b_i^{1/4} - cm_i b_i, with
// cp_i/cm_i the distortion increments of the i-th sorted slot. Moves are
// clamped to the neighbours so the order (and the separability) is kept.
class SortedLadder {
 public:
  SortedLadder(std::size_t m, const CoinGambleModel& model) : cp_(m), cm_(m) {
    const double md = static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double s_here = 0.5 * static_cast<double>(m - i) / md;
      const double s_next = 0.5 * static_cast<double>(m - i - 1) / md;
      cp_[i] = model.gain(s_here) - model.gain(s_next);
      cm_[i] = model.loss(s_here) - model.loss(s_next);
    }
  }

  [[nodiscard]] double term(std::size_t i, double b) const {
    return cp_[i] * std::sqrt(std::sqrt(b)) - cm_[i] * b;
  }

  [[nodiscard]] double total(const Vec& b) const {
    double v = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) v += term(i, b[i]);
    return v;
  }

  // Compass search in the sorted cone 0 <= b_1 <= ... <= b_m <= cap.
  std::size_t search(Vec& b, double cap, double step, double shrink, double min_step,
                     std::size_t budget) const {
    const std::size_t m = b.size();
    std::size_t evals = 0;
    while (step >= min_step && evals < budget) {
      bool improved = false;
      for (std::size_t i = 0; i < m; ++i) {
        const double lo = i == 0 ? 0.0 : b[i - 1];
        const double hi = i + 1 == m ? cap : b[i + 1];
        const double here = term(i, b[i]);
        for (double dir : {1.0, -1.0}) {
          const double cand = std::clamp(b[i] + dir * step, lo, hi);
          if (cand == b[i]) continue;
          ++evals;
          if (term(i, cand) > here) {
            b[i] = cand;
            improved = true;
            break;
          }
        }
      }
      // Tie blocks can only leave their common value together.
      for (std::size_t i = 0; i < m;) {
        std::size_t j = i + 1;
        while (j < m && b[j] == b[i]) ++j;
        if (j - i > 1) improved |= shift_block(b, i, j, step, cap, evals);
        i = j;
      }
      if (!improved) step *= shrink;
    }
    return evals;
  }

 private:
  bool shift_block(Vec& b, std::size_t i, std::size_t j, double step, double cap,
                   std::size_t& evals) const {
    const double lo = i == 0 ? 0.0 : b[i - 1];
    const double hi = j == b.size() ? cap : b[j];
    double here = 0.0;
    for (std::size_t k = i; k < j; ++k) here += term(k, b[k]);
    for (double dir : {1.0, -1.0}) {
      const double cand = std::clamp(b[i] + dir * step, lo, hi);
      if (cand == b[i]) continue;
      double there = 0.0;
      for (std::size_t k = i; k < j; ++k) there += term(k, cand);
      ++evals;
      if (there > here) {
        std::fill(b.begin() + static_cast<std::ptrdiff_t>(i),
                  b.begin() + static_cast<std::ptrdiff_t>(j), cand);
        return true;
      }
    }
    return false;
  }

  Vec cp_;
  Vec cm_;
};

}  // namespace

LadderResult ladder(int n_max, const SearchConfig& cfg, const CoinGambleModel& model) {
  validate(cfg);
  require(n_max >= 0, "ladder level must be >= 0");
  require(n_max <= kMaxLadderLevel,
          "ladder level above " + std::to_string(kMaxLadderLevel) + " refused (2^n atoms)");
  const double cap = initial_radius(cfg, 0.0);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  LadderResult out;
  Vec previous;
  for (int level = 0; level <= n_max; ++level) {
    const std::size_t m = std::size_t{1} << level;
    const SortedLadder obj(m, model);

    std::vector<Vec> starts;
    if (previous.empty()) {
      starts.emplace_back(m, 0.5 * cap);
    } else {
      Vec dup;
      for (double b : previous) dup.insert(dup.end(), {b, b});
      starts.push_back(std::move(dup));
    }
    while (static_cast<int>(starts.size()) < cfg.multistart) {
      Vec x(m);
      for (auto& v : x) v = cap * unit(rng);
      std::sort(x.begin(), x.end());
      starts.push_back(std::move(x));
    }

    std::size_t evals = 0;
    Vec best;
    double best_value = 0.0;
    for (auto& s : starts) {
      evals += obj.search(s, cap, 0.25 * cap, cfg.shrink, cfg.tolerance * cap,
                          cfg.max_evaluations);
      const double v = obj.total(s);
      if (best.empty() || v > best_value) {
        best = s;
        best_value = v;
      }
    }
    out.values.push_back(ladder_objective(best, model));
    out.argmax.push_back(best);
    out.evaluations.push_back(evals);
    previous = std::move(best);
  }
  return out;
}

PerturbationTable perturbation_check(const LadderResult& ladder, int level,
                                     std::span<const double> deltas) {
  require(level >= 0 && static_cast<std::size_t>(level) < ladder.argmax.size(),
          "perturbation level is not in the ladder");
  const Vec& b = ladder.argmax[static_cast<std::size_t>(level)];
  double a = 0.0;
  for (double v : b) {
    if (v > 0.0 && (a == 0.0 || v < a)) a = v;
  }
  require(a > 0.0, "ladder argmax has no nonzero atom");

  PerturbationTable t;
  t.level = level;
  t.a = a;
  const double m = static_cast<double>(b.size());
  for (double v : b) {
    if (v == a) t.mass_a += 1.0 / m;
    if (v > a) t.mass_above += 1.0 / m;
  }
  const double q = t.mass_above;
  t.derivative = std::sqrt(2.0) / 8.0 * std::pow(a, -0.75) *
                 (-std::sqrt(t.mass_a + q) + std::sqrt(2.0) * std::sqrt(t.mass_a + 2.0 * q) -
                  std::sqrt(q));

  const CoinGambleModel model;
  auto split = [&](double delta) {
    Vec out;
    out.reserve(2 * b.size());
    for (double v : b) {
      if (v == a) {
        out.insert(out.end(), {a + delta, a - delta});
      } else {
        out.insert(out.end(), {v, v});
      }
    }
    return out;
  };
  t.base_value = ladder_objective(split(0.0), model);
  for (double delta : deltas) {
    require(delta >= 0.0 && delta <= a, "perturbation needs 0 <= delta <= a");
    const LadderParts parts = ladder_parts(split(delta), model);
    PerturbationRow row;
    row.delta = delta;
    row.v_plus = parts.plus;
    row.v_minus = parts.minus;
    row.value = parts.value();
    row.slope = delta > 0.0 ? (row.value - t.base_value) / delta : 0.0;
    t.rows.push_back(row);
  }
  return t;
}

}  // namespace cptlab
