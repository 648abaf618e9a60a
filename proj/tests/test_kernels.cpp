#include <doctest.h>

#include <cmath>
#include <omp.h>

#include "cptlab/choquet.hpp"
#include "cptlab/kernels.hpp"
#include "cptlab/optimizer.hpp"
#include "support/instances.hpp"

using namespace cptlab;

namespace {

struct Threads {
  explicit Threads(int n) : saved(omp_get_max_threads()) { omp_set_num_threads(n); }
  ~Threads() { omp_set_num_threads(saved); }
  int saved;
};

}  // namespace

TEST_CASE("parallel batch evaluation matches the serial reference") {
  const Threads guard(4);
  std::mt19937_64 rng(1);
  const ScenarioTree tree = testing::random_tree(rng, 2, 2, 3);
  const PreferenceSpec pref = PreferenceSpec::tversky_kahneman();
  const ReferenceSpec ref = ReferenceSpec::constant(tree, 0.0);
  const CptEvaluator eval(tree, 1.0, ref, pref);
  const Objective f = [&eval](std::span<const double> x) { return eval.value(x); };
  std::vector<Vec> candidates;
  for (int i = 0; i < 257; ++i) candidates.push_back(flatten(tree, testing::random_strategy(rng, tree, 3.0)));
  CHECK(kernels::evaluate_batch(f, candidates) == kernels::serial::evaluate_batch(f, candidates));
}

TEST_CASE("parallel multistart matches the serial reference") {
  const Threads guard(4);
  const Objective f = [](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s -= std::pow(x[i] - 0.1 * static_cast<double>(i), 2.0);
    return s + std::cos(5.0 * x[0]);
  };
  const Box box{Vec(3, -2.0), Vec(3, 2.0)};
  std::mt19937_64 rng(2);
  std::vector<Vec> starts;
  for (int i = 0; i < 9; ++i) {
    starts.push_back({testing::uniform(rng, -2, 2), testing::uniform(rng, -2, 2), testing::uniform(rng, -2, 2)});
  }
  CompassOptions opts;
  opts.initial_step = 0.5;
  opts.min_step = 1e-9;
  const SearchOutcome par = kernels::multistart(f, starts, box, opts);
  const SearchOutcome ser = kernels::serial::multistart(f, starts, box, opts);
  CHECK(par.x == ser.x);
  CHECK(par.value == ser.value);
  CHECK(par.evaluations == ser.evaluations);
}

TEST_CASE("grid argmax agrees and breaks ties by the lowest index") {
  const Threads guard(4);
  const auto f = [](double x, double y) { return -std::abs(x - 0.3) - std::abs(y - 0.7); };
  const kernels::GridMax par = kernels::grid_argmax_2d(f, 0.0, 1.0, 0.01);
  const kernels::GridMax ser = kernels::serial::grid_argmax_2d(f, 0.0, 1.0, 0.01);
  CHECK(par.x == ser.x);
  CHECK(par.y == ser.y);
  CHECK(par.value == ser.value);
  CHECK(par.x == doctest::Approx(0.3));
  CHECK(par.y == doctest::Approx(0.7));

  const auto flat = [](double, double) { return 1.0; };
  const kernels::GridMax tie = kernels::grid_argmax_2d(flat, 0.0, 1.0, 0.1);
  CHECK(tie.x == 0.0);
  CHECK(tie.y == 0.0);
  CHECK(kernels::max_threads() >= 1);
}

TEST_CASE("optimizer results do not depend on the kernel variant") {
  const ScenarioTree tree = build_iid_market({{0.5, {1.0}}, {0.5, {-1.0}}}, 2);
  const PreferenceSpec pref = PreferenceSpec::root_gain_linear_loss();
  const ReferenceSpec ref = ReferenceSpec::constant(tree, 0.0);
  SearchConfig cfg;
  cfg.seed = 8;
  cfg.multistart = 5;
  const Threads guard(4);
  const auto par = optimize_randomized(tree, pref, 0.0, ref, 2, cfg);
  cfg.parallel = false;
  const auto ser = optimize_randomized(tree, pref, 0.0, ref, 2, cfg);
  CHECK(*par.value.v == *ser.value.v);
  CHECK(par.evaluations == ser.evaluations);
}

TEST_CASE("random directions let the compass search follow a diagonal ridge") {
  const Objective ridge = [](std::span<const double> x) {
    return -std::abs(x[0] - x[1]) - 0.2 * std::pow(x[0] + x[1] - 2.0, 2.0);
  };
  const Box box{Vec(2, -4.0), Vec(2, 4.0)};
  CompassOptions opts;
  opts.initial_step = 1.0;
  opts.min_step = 1e-10;
  const SearchOutcome axis = compass_search(ridge, {0.0, 0.0}, box, opts);
  opts.random_directions = 8;
  opts.seed = 3;
  const SearchOutcome polled = compass_search(ridge, {0.0, 0.0}, box, opts);
  CHECK(axis.value < -0.5);
  CHECK(polled.value > -1e-3);
  CHECK(std::abs(polled.x[0] - 1.0) < 0.05);
  CHECK(std::abs(polled.x[1] - 1.0) < 0.05);
  CHECK(compass_search(ridge, {0.0, 0.0}, box, opts).x == polled.x);
}
