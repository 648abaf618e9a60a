#include "cptlab/choquet.hpp"

#include <algorithm>
#include <cmath>

#include "cptlab/format.hpp"

namespace cptlab {

DiscreteRV::DiscreteRV(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  require(!atoms_.empty(), "discrete law needs at least one atom");
  double total = 0.0;
  for (const auto& a : atoms_) {
    require(std::isfinite(a.value), "discrete law has a non-finite value");
    require(a.prob > 0.0 && a.prob <= 1.0, "discrete law has a probability outside (0,1]");
    total += a.prob;
  }
  require(std::abs(total - 1.0) <= kProbabilityTolerance,
          "discrete law probabilities sum to " + format_double(total));
}

double DiscreteRV::expectation() const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.value * a.prob;
  return s;
}

double choquet_sum(std::vector<Atom>& atoms, const Distortion& w) {
  // Order by (value, prob) so that equal multisets of atoms produce
  // bit-identical sums regardless of input order.
  std::sort(atoms.begin(), atoms.end(), [](const Atom& l, const Atom& r) {
    return l.value < r.value || (l.value == r.value && l.prob < r.prob);
  });
  std::size_t m = 0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (atoms[i].prob <= 0.0) continue;
    if (m > 0 && atoms[m - 1].value == atoms[i].value) {
      atoms[m - 1].prob += atoms[i].prob;
    } else {
      atoms[m++] = atoms[i];
    }
  }
  atoms.resize(m);

  // survival[k] = P(X >= y_k), accumulated from the top.
  std::vector<double> survival(m);
  double tail = 0.0;
  for (std::size_t k = m; k-- > 0;) {
    tail += atoms[k].prob;
    survival[k] = std::min(tail, 1.0);
  }
  double total = 0.0;
  double prev = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    total += (atoms[k].value - prev) * w(survival[k]);
    prev = atoms[k].value;
  }
  return total;
}

double choquet_nonneg(const DiscreteRV& x, const Distortion& w) {
  std::vector<Atom> atoms(x.atoms().begin(), x.atoms().end());
  for (const auto& a : atoms) require(a.value >= 0.0, "choquet_nonneg needs nonnegative atoms");
  return choquet_sum(atoms, w);
}

CPTValue CPTValue::from_parts(ExtendedReal plus, ExtendedReal minus) {
  CPTValue r;
  r.v_plus = plus;
  r.v_minus = minus;
  r.admissible = minus.is_finite();
  if (r.admissible && plus.is_finite()) r.v = plus.value() - minus.value();
  return r;
}

// ---------------------------------------------------------------------------

namespace {

struct Split {
  double plus;
  double minus;
};

// Accumulates gain/loss utility atoms for one strategy into the buffers.
void collect(std::span<const double> wealth, std::span<const double> benchmark,
             std::span<const double> probs, double weight, const PreferenceSpec& pref,
             std::vector<Atom>& gains, std::vector<Atom>& losses) {
  for (std::size_t j = 0; j < wealth.size(); ++j) {
    const double diff = wealth[j] - benchmark[j];
    const double p = probs[j] * weight;
    if (diff > 0.0) {
      gains.push_back({pref.utility.gain(diff), p});
    } else if (diff < 0.0) {
      losses.push_back({pref.utility.loss(-diff), p});
    }
  }
}

Split integrate(std::vector<Atom>& gains, std::vector<Atom>& losses, const PreferenceSpec& pref) {
  return {choquet_sum(gains, pref.distortion.gain), choquet_sum(losses, pref.distortion.loss)};
}

}  // namespace

CptEvaluator::CptEvaluator(const ScenarioTree& tree, double x0, const ReferenceSpec& ref,
                           const PreferenceSpec& pref)
    : tree_(&tree),
      pref_(&pref),
      x0_(x0),
      benchmark_(ref.benchmark),
      dimension_(tree.internal_nodes().size() * static_cast<std::size_t>(tree.dim())) {
  require(std::isfinite(x0), "initial capital must be finite");
  require(benchmark_.size() == tree.leaves().size(),
          "reference benchmark must have one value per leaf");
}

double CptEvaluator::value(std::span<const double> flat) const {
  return mixture_value(flat, 1);
}

double CptEvaluator::mixture_value(std::span<const double> flat, std::size_t atoms) const {
  require(atoms >= 1 && flat.size() == atoms * dimension_, "flat strategy has wrong length");
  const std::size_t leaves = tree_->leaves().size();
  std::vector<double> wealth(leaves);
  std::vector<Atom> gains;
  std::vector<Atom> losses;
  gains.reserve(leaves * atoms);
  losses.reserve(leaves * atoms);
  const double weight = 1.0 / static_cast<double>(atoms);
  for (std::size_t a = 0; a < atoms; ++a) {
    terminal_wealth_flat(*tree_, flat.subspan(a * dimension_, dimension_), x0_, wealth);
    collect(wealth, benchmark_, tree_->leaf_probabilities(), atoms == 1 ? 1.0 : weight, *pref_,
            gains, losses);
  }
  const Split s = integrate(gains, losses, *pref_);
  return s.plus - s.minus;
}

CPTValue cpt_value(const ScenarioTree& tree, const PureStrategy& strategy, double x0,
                   const ReferenceSpec& ref, const PreferenceSpec& pref) {
  RandomizedStrategy single;
  single.atoms.emplace_back(1.0, strategy);
  return cpt_value(tree, single, x0, ref, pref);
}

CPTValue cpt_value(const ScenarioTree& tree, const RandomizedStrategy& strategy, double x0,
                   const ReferenceSpec& ref, const PreferenceSpec& pref) {
  validate_strategy(tree, strategy);
  require(ref.benchmark.size() == tree.leaves().size(),
          "reference benchmark must have one value per leaf");
  require(std::isfinite(x0), "initial capital must be finite");
  std::vector<Atom> gains;
  std::vector<Atom> losses;
  Vec wealth(tree.leaves().size());
  for (const auto& [weight, pure] : strategy.atoms) {
    terminal_wealth_flat(tree, flatten(tree, pure), x0, wealth);
    collect(wealth, ref.benchmark, tree.leaf_probabilities(), weight, pref, gains, losses);
  }
  const Split s = integrate(gains, losses, pref);
  return CPTValue::from_parts(ExtendedReal::finite(s.plus), ExtendedReal::finite(s.minus));
}

// ---------------------------------------------------------------------------

AuxParams derive_aux_params(const PreferenceSpec& pref, const ReferenceSpec& ref) {
  const double lambda = resolve_lambda(pref);
  const double ap = pref.utility.alpha_plus;
  const double kp = pref.utility.k_plus;
  const double gp = pref.distortion.g_plus;
  const double cp = pref.distortion.gamma_plus;
  const double lead = std::pow(2.0, lambda - 1.0) * std::pow(kp, lambda);
  AuxParams aux;
  aux.lambda = lambda;
  aux.k_minus_tilde = pref.distortion.g_minus * pref.utility.k_minus;
  aux.k_plus_tilde =
      1.0 + gp / (lambda * cp - 1.0) *
                (lead * (1.0 + std::pow(std::abs(ref.floor), lambda * ap)) + lead + 1.0);
  aux.subhedge = ref.subhedge;
  aux.floor = ref.floor;
  return aux;
}

AuxValue aux_value(const ScenarioTree& tree, const RandomizedStrategy& strategy, double x0,
                   const AuxParams& aux, const PreferenceSpec& pref) {
  validate_strategy(tree, strategy);
  const Vec phi = flatten(tree, aux.subhedge);
  const double gain_exp = aux.lambda * pref.utility.alpha_plus;
  const double loss_exp = pref.utility.alpha_minus;
  const auto probs = tree.leaf_probabilities();
  double gain_moment = 0.0;
  double loss_moment = 0.0;
  Vec z(tree.leaves().size());
  for (const auto& [weight, pure] : strategy.atoms) {
    Vec diff = flatten(tree, pure);
    for (std::size_t k = 0; k < diff.size(); ++k) diff[k] -= phi[k];
    terminal_wealth_flat(tree, diff, x0, z);
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double p = probs[j] * weight;
      gain_moment += p * std::pow(std::abs(z[j]), gain_exp);
      const double shortfall = std::max(aux.floor - z[j], 0.0);
      if (shortfall > 0.0) loss_moment += p * std::pow(shortfall, loss_exp);
    }
  }
  AuxValue v;
  v.plus = aux.k_plus_tilde * (1.0 + gain_moment);
  v.minus = aux.k_minus_tilde * (loss_moment - 1.0);
  v.total = v.plus - v.minus;
  return v;
}

AuxValue aux_value(const ScenarioTree& tree, const PureStrategy& strategy, double x0,
                   const AuxParams& aux, const PreferenceSpec& pref) {
  RandomizedStrategy single;
  single.atoms.emplace_back(1.0, strategy);
  return aux_value(tree, single, x0, aux, pref);
}

ExtendedReal tail_power_integral(double c, double e) {
  require(c > 0.0 && e > 0.0, "tail_power_integral needs c > 0 and e > 0");
  if (e <= 1.0) return ExtendedReal::plus_infinity();
  return ExtendedReal::finite(c / (e - 1.0));
}

std::optional<TailBound> moment_tail_certificate(const std::map<double, double>& moments,
                                                 double delta) {
  require(delta > 0.0, "delta must be > 0");
  for (const auto& [order, moment] : moments) {
    require(moment >= 0.0, "moments of a nonnegative variable must be >= 0");
    if (order * delta > 1.0) {
      return TailBound{order, 1.0 + std::pow(moment, delta) / (order * delta - 1.0)};
    }
  }
  return std::nullopt;
}

}  // namespace cptlab
