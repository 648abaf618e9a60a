#pragma once

// Ill-posedness constructions in closed form (two-step Pareto strategy,
// one-step scaling) and an empirical boundedness probe on trees.

#include <string>
#include <vector>

#include "cptlab/extended.hpp"
#include "cptlab/market.hpp"
#include "cptlab/optimizer.hpp"
#include "cptlab/preferences.hpp"

namespace cptlab {

enum class Verdict { well_posed_instance, ill_posed, inconclusive };
std::string to_string(Verdict v);

struct ScanPoint {
  double n = 0.0;
  double v_plus = 0.0;
  double v_minus = 0.0;
  double v = 0.0;
};

/// Two-step market: dS1 uniform on [-1,1], dS2 = +-1, theta1 = 0 and
/// theta2 Pareto with P(theta2 >= y) = y^{-ell} on [1, inf).
struct IllposednessReport {
  double ell = 0.0;
  /// Tail integrals int_1^inf s 2^{-c} y^{-e} dy, e = ell c / a, as displayed
  /// for the construction (s = 1 for gains, the loss scale for losses).
  ExtendedReal v_plus;
  ExtendedReal v_minus;
  /// int_0^1 terms, s 2^{-c}: the full V+- is head + tail.
  double head_plus = 0.0;
  double head_minus = 0.0;
  double exponent_plus = 0.0;   // ell c+ / a+
  double exponent_minus = 0.0;  // ell c- / a-
  Verdict verdict = Verdict::inconclusive;
  std::vector<ScanPoint> scan;
};

/// Requires power utilities and identity/power distortions; ell > 0.
IllposednessReport two_step_example(const PreferenceSpec& pref, double ell);

/// Exact V+-(0; theta(n)) for the truncation theta2(n) = min(theta2, n):
///   s 2^{-c} (1 + int_1^{(n^a)} y^{-e} dy) on each side. Requires n >= 1.
std::vector<ScanPoint> truncation_scan(const PreferenceSpec& pref, double ell,
                                       const std::vector<double>& n_list);

/// One-step two-point market, theta1 = n: w+(p) n^a+ - k w-(1-p) n^a-.
double one_step_scaling(const PreferenceSpec& pref, double p, double n);

struct ProbePoint {
  double radius = 0.0;
  double value = 0.0;
};

struct BoundednessProbe {
  std::vector<ProbePoint> points;
  bool plateau = false;
  bool condition_a = false;
  double relative_tolerance = 1e-6;
  int plateau_window = 3;
};

/// Best V found inside |theta - phi|_inf <= R for each R (increasing), each
/// search warm-started from the previous winner. Plateau: the last
/// `plateau_window` steps each improve V by less than `relative_tolerance`
/// relative. Refuses preferences failing condition (a) unless
/// `allow_violating` is set.
BoundednessProbe boundedness_probe(const ScenarioTree& tree, const PreferenceSpec& pref,
                                   double x0, const ReferenceSpec& ref,
                                   const std::vector<double>& radii, const SearchConfig& cfg,
                                   bool allow_violating = false);

/// Discretization of the two-step market with `atoms` first-step values.
ScenarioTree two_step_market(int atoms, Discretization scheme);

}  // namespace cptlab
