#include "cptlab/wellposed.hpp"

#include <cmath>

#include "cptlab/choquet.hpp"

namespace cptlab {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::well_posed_instance:
      return "well-posed-instance";
    case Verdict::ill_posed:
      return "ill-posed";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

namespace {

struct Side {
  double alpha;
  double gamma;
  double scale;
};

double distortion_gamma(const Distortion& w) {
  switch (w.family()) {
    case DistortionFamily::identity:
      return 1.0;
    case DistortionFamily::power:
      return w.gamma();
    default:
      throw ValidationError("two-step construction needs identity or power distortions, got " +
                            to_string(w.family()));
  }
}

std::pair<Side, Side> power_sides(const PreferenceSpec& pref) {
  require(pref.utility.gain.family() == UtilityFamily::power &&
              pref.utility.loss.family() == UtilityFamily::power,
          "two-step construction needs power utilities");
  const Side plus{pref.utility.gain.exponent(), distortion_gamma(pref.distortion.gain),
                  pref.utility.gain.scale()};
  const Side minus{pref.utility.loss.exponent(), distortion_gamma(pref.distortion.loss),
                   pref.utility.loss.scale()};
  return {plus, minus};
}

// s 2^{-c} (1 + int_1^{N} y^{-e} dy), N = n^a, for the scaled utility s x^a.
double truncated_side(const Side& side, double ell, double n) {
  const double e = ell * side.gamma / side.alpha;
  const double log_n = side.alpha * std::log(n);
  const double tail = e == 1.0 ? log_n : std::expm1((1.0 - e) * log_n) / (1.0 - e);
  return side.scale * std::pow(2.0, -side.gamma) * (1.0 + tail);
}

}  // namespace

IllposednessReport two_step_example(const PreferenceSpec& pref, double ell) {
  require(std::isfinite(ell) && ell > 0.0, "ell must be > 0");
  const auto [plus, minus] = power_sides(pref);
  IllposednessReport r;
  r.ell = ell;
  r.exponent_plus = ell * plus.gamma / plus.alpha;
  r.exponent_minus = ell * minus.gamma / minus.alpha;
  r.head_plus = plus.scale * std::pow(2.0, -plus.gamma);
  r.head_minus = minus.scale * std::pow(2.0, -minus.gamma);
  r.v_plus = tail_power_integral(r.head_plus, r.exponent_plus);
  r.v_minus = tail_power_integral(r.head_minus, r.exponent_minus);
  if (r.v_minus.is_finite()) {
    r.verdict = r.v_plus.is_finite() ? Verdict::well_posed_instance : Verdict::ill_posed;
  }
  return r;
}

std::vector<ScanPoint> truncation_scan(const PreferenceSpec& pref, double ell,
                                       const std::vector<double>& n_list) {
  require(std::isfinite(ell) && ell > 0.0, "ell must be > 0");
  const auto [plus, minus] = power_sides(pref);
  std::vector<ScanPoint> out;
  out.reserve(n_list.size());
  for (double n : n_list) {
    require(std::isfinite(n) && n >= 1.0, "truncation level must be >= 1");
    ScanPoint pt;
    pt.n = n;
    pt.v_plus = truncated_side(plus, ell, n);
    pt.v_minus = truncated_side(minus, ell, n);
    pt.v = pt.v_plus - pt.v_minus;
    out.push_back(pt);
  }
  return out;
}

double one_step_scaling(const PreferenceSpec& pref, double p, double n) {
  require(p > 0.0 && p < 1.0, "p must lie in (0,1)");
  require(std::isfinite(n) && n >= 0.0, "n must be >= 0");
  if (n == 0.0) return 0.0;
  return pref.distortion.gain(p) * pref.utility.gain(n) -
         pref.distortion.loss(1.0 - p) * pref.utility.loss(n);
}

BoundednessProbe boundedness_probe(const ScenarioTree& tree, const PreferenceSpec& pref,
                                   double x0, const ReferenceSpec& ref,
                                   const std::vector<double>& radii, const SearchConfig& cfg,
                                   bool allow_violating) {
  BoundednessProbe probe;
  probe.condition_a = check_conditions(pref).condition_a;
  require(probe.condition_a || allow_violating,
          "boundedness probe needs condition (a): a+/c+ < a-");
  require(!radii.empty(), "boundedness probe needs at least one radius");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    require(std::isfinite(radii[i]) && radii[i] >= 0.0, "radii must be finite and >= 0");
    require(i == 0 || radii[i] > radii[i - 1], "radii must be strictly increasing");
  }

  std::vector<Vec> warm;
  for (double radius : radii) {
    ProbePoint pt;
    pt.radius = radius;
    if (radius == 0.0) {
      const CPTValue v = cpt_value(tree, ref.subhedge, x0, ref, pref);
      pt.value = *v.v;
    } else {
      SearchConfig local = cfg;
      local.radius = radius;
      local.max_doublings = 0;
      const PureSearchResult best = optimize_pure(tree, pref, x0, ref, local, warm);
      pt.value = *best.value.v;
      warm.assign(1, flatten(tree, best.strategy));
    }
    probe.points.push_back(pt);
  }

  const auto& pts = probe.points;
  const std::size_t window = static_cast<std::size_t>(probe.plateau_window);
  if (pts.size() > window) {
    probe.plateau = true;
    for (std::size_t i = pts.size() - window; i < pts.size(); ++i) {
      const double prev = pts[i - 1].value;
      const double gain = pts[i].value - prev;
      if (gain >= probe.relative_tolerance * std::max(std::abs(prev), 1e-300)) {
        probe.plateau = false;
      }
    }
  }
  return probe;
}

ScenarioTree two_step_market(int atoms, Discretization scheme) {
  return build_two_step_market(uniform_pmf(-1.0, 1.0, atoms, scheme));
}

}  // namespace cptlab
