#pragma once

// Choquet integrals of finite laws and the CPT objective on scenario trees.

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "cptlab/extended.hpp"
#include "cptlab/market.hpp"
#include "cptlab/preferences.hpp"

namespace cptlab {

struct Atom {
  double value = 0.0;
  double prob = 0.0;
};

/// Finite law. Probabilities in (0,1] summing to one within 1e-12.
class DiscreteRV {
 public:
  explicit DiscreteRV(std::vector<Atom> atoms);
  [[nodiscard]] std::span<const Atom> atoms() const { return atoms_; }
  [[nodiscard]] double expectation() const;

 private:
  std::vector<Atom> atoms_;
};

/// int_0^inf w(P(X >= y)) dy for X >= 0. Ties are merged (exact equality),
/// then with sorted distinct values y_1 < ... < y_m and survival
/// S_k = P(X >= y_k) the integral is sum_k (y_k - y_{k-1}) w(S_k), y_0 = 0.
double choquet_nonneg(const DiscreteRV& x, const Distortion& w);

/// Same sum for unnormalized atoms (zero-probability atoms skipped, mass
/// need not add to one). `atoms` is sorted in place.
double choquet_sum(std::vector<Atom>& atoms, const Distortion& w);

struct CPTValue {
  ExtendedReal v_plus;
  ExtendedReal v_minus;
  std::optional<double> v;  // set whenever V- is finite and V+ is finite
  bool admissible = true;   // V- < inf

  static CPTValue from_parts(ExtendedReal plus, ExtendedReal minus);
};

/// V+ - V- of the terminal-wealth law against the reference point.
CPTValue cpt_value(const ScenarioTree& tree, const PureStrategy& strategy, double x0,
                   const ReferenceSpec& ref, const PreferenceSpec& pref);
/// Randomized strategies are evaluated on the product (atom x leaf) law.
CPTValue cpt_value(const ScenarioTree& tree, const RandomizedStrategy& strategy, double x0,
                   const ReferenceSpec& ref, const PreferenceSpec& pref);

/// Reusable evaluator over flattened strategies, for search loops. Holds no
/// mutable state; every call is independent and thread-safe.
class CptEvaluator {
 public:
  CptEvaluator(const ScenarioTree& tree, double x0, const ReferenceSpec& ref,
               const PreferenceSpec& pref);

  [[nodiscard]] std::size_t dimension() const { return dimension_; }
  [[nodiscard]] const ScenarioTree& tree() const { return *tree_; }

  /// V for one flattened pure strategy.
  [[nodiscard]] double value(std::span<const double> flat) const;
  /// V for `atoms` equal-weight strategies packed back to back.
  [[nodiscard]] double mixture_value(std::span<const double> flat, std::size_t atoms) const;

 private:
  const ScenarioTree* tree_;
  const PreferenceSpec* pref_;
  double x0_;
  Vec benchmark_;
  std::size_t dimension_;
};

/// Constants of the dominating expected-utility objective.
struct AuxParams {
  double k_plus_tilde = 0.0;
  double k_minus_tilde = 0.0;
  double lambda = 0.0;
  PureStrategy subhedge;
  double floor = 0.0;
};

/// k~- = g- k-;  k~+ = 1 + g+/(lambda c+ - 1) (2^{lambda-1} k+^lambda (1 + |b|^{lambda a+})
/// + 2^{lambda-1} k+^lambda + 1). Requires condition (a).
AuxParams derive_aux_params(const PreferenceSpec& pref, const ReferenceSpec& ref);

struct AuxValue {
  double plus = 0.0;
  double minus = 0.0;
  double total = 0.0;
};

/// V~+ = k~+ E(1 + |Z|^{lambda a+}),  V~- = k~- (E[Z - b]_-^{a-} - 1) with
/// Z = X0 + sum (theta - phi) dS.
AuxValue aux_value(const ScenarioTree& tree, const PureStrategy& strategy, double x0,
                   const AuxParams& aux, const PreferenceSpec& pref);
AuxValue aux_value(const ScenarioTree& tree, const RandomizedStrategy& strategy, double x0,
                   const AuxParams& aux, const PreferenceSpec& pref);

/// int_1^inf c y^{-e} dy = c/(e-1) for e > 1, +inf otherwise.
ExtendedReal tail_power_integral(double c, double e);

struct TailBound {
  double order = 0.0;  // the moment order N used
  double bound = 0.0;  // 1 + E[Y^N]^delta / (N delta - 1)
};

/// Bound on int_0^inf P^delta(Y >= y) dy from a moment table N -> E[Y^N],
/// using the smallest N with N delta > 1. Empty when no such N is given.
std::optional<TailBound> moment_tail_certificate(const std::map<double, double>& moments,
                                                 double delta);

}  // namespace cptlab
