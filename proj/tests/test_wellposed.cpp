#include <doctest.h>

#include <cmath>

#include "cptlab/wellposed.hpp"
#include "support/instances.hpp"

using namespace cptlab;

namespace {

PreferenceSpec illposed_pref() {
  return PreferenceSpec::power_family(0.9, 1.0, 1.0, Distortion::power(0.5), Distortion::identity());
}

// Quantile discretization of the gains side of the truncated two-step
// strategy: V+ = int w+(P(u+(X+) >= y)) dy with X+ = min(theta2, n) on heads.
double gains_by_quadrature(const PreferenceSpec& pref, double ell, double n, int atoms) {
  std::vector<Atom> law;
  law.reserve(static_cast<std::size_t>(atoms) + 1);
  law.push_back({0.0, 0.5});
  for (int j = 0; j < atoms; ++j) {
    const double u = (j + 0.5) / atoms;
    const double theta = std::min(std::pow(1.0 - u, -1.0 / ell), n);
    law.push_back({pref.utility.gain(theta), 0.5 / atoms});
  }
  return choquet_sum(law, pref.distortion.gain);
}

}  // namespace

TEST_CASE("two-step construction on the ill-posed instance") {
  const IllposednessReport r = two_step_example(illposed_pref(), 1.5);
  CHECK(r.v_plus.is_plus_infinity());
  CHECK(r.v_minus.value() == 1.0);
  CHECK(r.verdict == Verdict::ill_posed);
  CHECK(to_string(r.verdict) == "ill-posed");
  CHECK(r.exponent_plus == doctest::Approx(0.75 / 0.9));
  CHECK(r.exponent_minus == 1.5);
  CHECK(r.head_plus == doctest::Approx(std::sqrt(0.5)));
  CHECK(r.head_minus == 0.5);
}

TEST_CASE("truncation scan grows without bound") {
  const auto scan = truncation_scan(illposed_pref(), 1.5, {1.0, 10.0, 1e3, 1e6});
  REQUIRE(scan.size() == 4);
  const double oracle[] = {0.20710678118654757, 1.2735831189841709, 6.9534749667340365,
                           28.665958969756029};
  for (std::size_t i = 0; i < 4; ++i) CHECK(scan[i].v == doctest::Approx(oracle[i]).epsilon(1e-12));
  for (std::size_t i = 1; i < 4; ++i) CHECK(scan[i].v > scan[i - 1].v);
  CHECK(scan[0].v == std::sqrt(0.5) - 0.5);
  CHECK_THROWS_AS(truncation_scan(illposed_pref(), 1.5, {0.5}), ValidationError);
}

TEST_CASE("truncated gains agree with a quantile discretization") {
  const PreferenceSpec pref = illposed_pref();
  for (double n : {2.0, 10.0, 50.0}) {
    const double exact = truncation_scan(pref, 1.5, {n})[0].v_plus;
    CHECK(std::abs(gains_by_quadrature(pref, 1.5, n, 200000) - exact) <= 1e-3);
  }
}

TEST_CASE("well-posed instance converges") {
  const PreferenceSpec pref = illposed_pref();
  const IllposednessReport r = two_step_example(pref, 3.0);
  REQUIRE(r.verdict == Verdict::well_posed_instance);
  const double full = r.head_plus + r.v_plus.value() - r.head_minus - r.v_minus.value();
  const auto scan = truncation_scan(pref, 3.0, {10.0, 1e3, 1e6});
  for (std::size_t i = 1; i < scan.size(); ++i) CHECK(scan[i].v > scan[i - 1].v);
  CHECK(scan.back().v < full);
  CHECK(full - scan.back().v < 1e-3);
}

TEST_CASE("ill-posed verdict exists exactly when condition (a) fails") {
  std::mt19937_64 rng(12);
  int ill = 0;
  int fine = 0;
  for (int i = 0; i < 400; ++i) {
    const double ap = testing::uniform(rng, 0.05, 1.0);
    const double am = testing::uniform(rng, 0.05, 1.0);
    const double gp = testing::uniform(rng, 0.2, 1.0);
    const PreferenceSpec pref =
        PreferenceSpec::power_family(ap, am, 1.0, Distortion::power(gp), Distortion::identity());
    // The largest tail index that can break V+ is ell = a+/c+ (shaded so
    // that e+ = 1 survives rounding).
    const IllposednessReport r = two_step_example(pref, (1.0 - 1e-12) * ap / gp);
    const bool cond_a = check_conditions(pref).condition_a;
    CHECK((r.verdict == Verdict::ill_posed) == !cond_a);
    CHECK(check_conditions(pref).lambda_interval.has_value() == cond_a);
    (cond_a ? fine : ill) += 1;
  }
  CHECK(ill > 50);
  CHECK(fine > 50);
}

TEST_CASE("one-step scaling") {
  const PreferenceSpec grows =
      PreferenceSpec::power_family(0.9, 0.5, 2.0, Distortion::identity(), Distortion::identity());
  const PreferenceSpec falls =
      PreferenceSpec::power_family(0.5, 0.9, 2.0, Distortion::identity(), Distortion::identity());
  CHECK(one_step_scaling(grows, 0.5, 1e8) > 1e3);
  CHECK(one_step_scaling(falls, 0.5, 1e8) < -1e3);
  CHECK(one_step_scaling(falls, 0.5, 0.0) == 0.0);
  CHECK(one_step_scaling(falls, 0.5, 1.0) == 0.5 - 2.0 * 0.5);
  CHECK_THROWS_AS(one_step_scaling(falls, 1.0, 2.0), ValidationError);
}

TEST_CASE("non-power preferences are refused by the closed forms") {
  CHECK_THROWS_AS(two_step_example(PreferenceSpec::tversky_kahneman(), 1.5), ValidationError);
  CHECK_THROWS_AS(two_step_example(illposed_pref(), 0.0), ValidationError);
}

TEST_CASE("boundedness probe on the coin market") {
  const ScenarioTree tree = build_iid_market({{0.5, {1.0}}, {0.5, {-1.0}}}, 1);
  const PreferenceSpec pref = PreferenceSpec::root_gain_linear_loss();
  const ReferenceSpec ref = ReferenceSpec::constant(tree, 0.0);
  SearchConfig cfg;
  cfg.seed = 3;
  cfg.multistart = 4;
  const BoundednessProbe probe =
      boundedness_probe(tree, pref, 0.0, ref, {0.0, 1.0, 2.0, 4.0, 8.0, 16.0}, cfg);
  REQUIRE(probe.points.size() == 6);
  CHECK(probe.points[0].value == 0.0);
  CHECK(probe.plateau);
  CHECK(probe.condition_a);
  for (std::size_t i = 1; i < probe.points.size(); ++i) {
    CHECK(probe.points[i].value >= probe.points[i - 1].value);
    CHECK(probe.points[i].value == doctest::Approx(0.375).epsilon(1e-9));
  }
  CHECK_THROWS_AS(boundedness_probe(tree, pref, 0.0, ref, {2.0, 1.0}, cfg), ValidationError);
}

TEST_CASE("boundedness probe refuses violating preferences unless asked") {
  const ScenarioTree tree = two_step_market(4, Discretization::midpoint);
  const ReferenceSpec ref = ReferenceSpec::constant(tree, 0.0);
  SearchConfig cfg;
  cfg.seed = 4;
  cfg.multistart = 2;
  CHECK_THROWS_AS(boundedness_probe(tree, illposed_pref(), 0.0, ref, {1.0, 2.0}, cfg),
                  ValidationError);
  const BoundednessProbe probe =
      boundedness_probe(tree, illposed_pref(), 0.0, ref, {1.0, 2.0, 4.0}, cfg, true);
  CHECK_FALSE(probe.condition_a);
  for (std::size_t i = 1; i < probe.points.size(); ++i) {
    CHECK(probe.points[i].value > probe.points[i - 1].value);
  }
}
