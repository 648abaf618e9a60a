#pragma once

// Seeded random instances shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <random>

#include "cptlab/choquet.hpp"
#include "cptlab/market.hpp"
#include "cptlab/preferences.hpp"

namespace cptlab::testing {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Branch increments with at least one gain and one loss in every coordinate
// direction that matters: d = 1 gets mixed signs, d = 2 gets a rotated
// triangle around the origin (no arbitrage, affinely spanning).
inline std::vector<Vec> node_increments(std::mt19937_64& rng, int dim, int branches) {
  std::vector<Vec> inc;
  if (dim == 1) {
    inc.push_back({uniform(rng, 0.2, 2.0)});
    inc.push_back({-uniform(rng, 0.2, 2.0)});
    for (int b = 2; b < branches; ++b) inc.push_back({uniform(rng, -2.0, 2.0)});
    return inc;
  }
  const double phase = uniform(rng, 0.0, 2.0 * M_PI);
  for (int b = 0; b < std::max(branches, 3); ++b) {
    const double angle = phase + 2.0 * M_PI * b / std::max(branches, 3);
    const double r = uniform(rng, 0.3, 1.5);
    Vec v(static_cast<std::size_t>(dim), 0.0);
    v[0] = r * std::cos(angle);
    v[1] = r * std::sin(angle);
    for (int k = 2; k < dim; ++k) v[static_cast<std::size_t>(k)] = uniform(rng, -1.0, 1.0);
    inc.push_back(std::move(v));
  }
  return inc;
}

inline ScenarioTree random_tree(std::mt19937_64& rng, int horizon, int dim, int max_branch) {
  TreeBuilder b(horizon, dim);
  std::vector<NodeId> frontier{b.add_root()};
  for (int t = 0; t < horizon; ++t) {
    std::vector<NodeId> next;
    for (NodeId parent : frontier) {
      const int branches = uniform_int(rng, 2, max_branch);
      const auto inc = node_increments(rng, dim, branches);
      Vec w(inc.size());
      for (auto& x : w) x = uniform(rng, 0.2, 1.0);
      double total = 0.0;
      for (double x : w) total += x;
      double used = 0.0;
      for (std::size_t i = 0; i < inc.size(); ++i) {
        const double p = i + 1 == inc.size() ? 1.0 - used : w[i] / total;
        used += p;
        next.push_back(b.add_child(parent, p, inc[i]));
      }
    }
    frontier = std::move(next);
  }
  return std::move(b).build();
}

inline PureStrategy random_strategy(std::mt19937_64& rng, const ScenarioTree& tree, double scale) {
  PureStrategy s = PureStrategy::zero(tree);
  for (auto& [node, theta] : s.allocation) {
    for (auto& v : theta) v = uniform(rng, -scale, scale);
  }
  return s;
}

/// Power preferences satisfying a+/c+ < a-, with a random mix of power,
/// TK and identity distortions.
inline PreferenceSpec random_condition_a_pref(std::mt19937_64& rng) {
  const double alpha_minus = uniform(rng, 0.5, 1.0);
  const int family = uniform_int(rng, 0, 2);
  Distortion w_plus = Distortion::identity();
  double gamma_plus = 1.0;
  if (family == 1) {
    gamma_plus = uniform(rng, 0.5, 1.0);
    w_plus = Distortion::power(gamma_plus);
  } else if (family == 2) {
    gamma_plus = uniform(rng, 0.6, 1.0);
    w_plus = Distortion::tk(gamma_plus);
  }
  const double alpha_plus = uniform(rng, 0.1, 0.9) * alpha_minus * gamma_plus;
  Distortion w_minus = Distortion::identity();
  const int loss_family = uniform_int(rng, 0, 2);
  if (loss_family == 1) w_minus = Distortion::power(uniform(rng, 0.5, 1.0));
  if (loss_family == 2) w_minus = Distortion::tk(uniform(rng, 0.6, 1.0));
  return PreferenceSpec::power_family(alpha_plus, alpha_minus, uniform(rng, 1.0, 3.0),
                                      std::move(w_plus), std::move(w_minus));
}

/// Sub-hedge reference: random phi and floor b, B = b + sum phi dS + slack.
inline ReferenceSpec random_reference(std::mt19937_64& rng, const ScenarioTree& tree) {
  ReferenceSpec ref;
  ref.subhedge = random_strategy(rng, tree, 1.0);
  ref.floor = uniform(rng, -2.0, 2.0);
  ref.benchmark = terminal_wealth(tree, ref.subhedge, ref.floor);
  for (auto& v : ref.benchmark) v += uniform(rng, 0.0, 1.0);
  return ref;
}

/// Random finite law with 1..max_atoms atoms on [0, 10).
inline DiscreteRV random_law(std::mt19937_64& rng, int max_atoms) {
  const int n = uniform_int(rng, 1, max_atoms);
  std::vector<Atom> atoms(static_cast<std::size_t>(n));
  double total = 0.0;
  for (auto& a : atoms) {
    a.value = uniform(rng, 0.0, 10.0);
    a.prob = uniform(rng, 0.05, 1.0);
    total += a.prob;
  }
  double used = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    atoms[i].prob = i + 1 == atoms.size() ? 1.0 - used : atoms[i].prob / total;
    used += atoms[i].prob;
  }
  return DiscreteRV(std::move(atoms));
}

/// Midpoint rule for int_0^max w(P(X >= y)) dy with `panels` panels.
inline double riemann_choquet(const DiscreteRV& x, const Distortion& w, int panels) {
  double top = 0.0;
  for (const auto& a : x.atoms()) top = std::max(top, a.value);
  if (top == 0.0) return 0.0;
  std::vector<Atom> sorted(x.atoms().begin(), x.atoms().end());
  std::sort(sorted.begin(), sorted.end(),
            [](const Atom& l, const Atom& r) { return l.value < r.value; });
  std::vector<double> tail(sorted.size() + 1, 0.0);
  for (std::size_t k = sorted.size(); k-- > 0;) tail[k] = tail[k + 1] + sorted[k].prob;
  const double h = top / panels;
  double sum = 0.0;
  std::size_t idx = 0;
  for (int i = 0; i < panels; ++i) {
    const double y = (i + 0.5) * h;
    while (idx < sorted.size() && sorted[idx].value < y) ++idx;
    sum += w(std::min(tail[idx], 1.0));
  }
  return sum * h;
}

}  // namespace cptlab::testing
