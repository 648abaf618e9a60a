#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cptlab/market.hpp"
#include "support/instances.hpp"

using namespace cptlab;

namespace {

ScenarioTree coin_tree(int horizon = 1) {
  return build_iid_market({{0.5, {1.0}}, {0.5, {-1.0}}}, horizon);
}

ScenarioTree one_step(const std::vector<Vec>& increments) {
  TreeBuilder b(1, static_cast<int>(increments.front().size()));
  const NodeId root = b.add_root();
  const double p = 1.0 / static_cast<double>(increments.size());
  double used = 0.0;
  for (std::size_t i = 0; i < increments.size(); ++i) {
    const double q = i + 1 == increments.size() ? 1.0 - used : p;
    used += q;
    b.add_child(root, q, increments[i]);
  }
  return std::move(b).build();
}

}  // namespace

TEST_CASE("tree builder rejects malformed trees") {
  TreeBuilder bad_sum(1, 1);
  const NodeId r = bad_sum.add_root();
  bad_sum.add_child(r, 0.5, {1.0});
  bad_sum.add_child(r, 0.4, {-1.0});
  CHECK_THROWS_AS((void)std::move(bad_sum).build(), ValidationError);

  TreeBuilder short_leaf(2, 1);
  const NodeId r2 = short_leaf.add_root();
  const NodeId a = short_leaf.add_child(r2, 0.5, {1.0});
  short_leaf.add_child(r2, 0.5, {-1.0});
  short_leaf.add_child(a, 1.0, {1.0});
  CHECK_THROWS_AS((void)std::move(short_leaf).build(), ValidationError);

  TreeBuilder wrong_dim(1, 2);
  const NodeId r3 = wrong_dim.add_root();
  CHECK_THROWS_AS(wrong_dim.add_child(r3, 1.0, {1.0}), ValidationError);
}

TEST_CASE("terminal wealth on the coin market") {
  const ScenarioTree tree = coin_tree();
  const Vec zero = terminal_wealth(tree, PureStrategy::zero(tree), 5.0);
  CHECK(zero == Vec{5.0, 5.0});
  const Vec quarter = terminal_wealth(tree, PureStrategy::constant(tree, {0.25}), 0.0);
  CHECK(quarter == Vec{0.25, -0.25});
}

TEST_CASE("two-step strategy theta2 = g(dS1) gives leaf wealth +-g(dS1)") {
  const ScenarioTree tree = build_two_step_market(uniform_pmf(-1.0, 1.0, 8, Discretization::midpoint));
  const double ell = 1.5;
  auto g = [ell](double x) { return std::pow(2.0 / (1.0 - x), 1.0 / ell); };
  PureStrategy s = PureStrategy::zero(tree);
  for (NodeId id : tree.internal_nodes()) {
    if (tree.node(id).depth == 1) s.allocation[id] = {g(tree.node(id).increment[0])};
  }
  const Vec wealth = terminal_wealth(tree, s, 0.0);
  for (std::size_t j = 0; j < tree.leaves().size(); ++j) {
    const Node& leaf = tree.node(tree.leaves()[j]);
    const Node& mid = tree.node(*leaf.parent);
    CHECK(wealth[j] == g(mid.increment[0]) * leaf.increment[0]);
  }
}

TEST_CASE("terminal wealth is linear in capital and strategy") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const ScenarioTree tree = testing::random_tree(rng, 2, 1 + trial % 2, 3);
    const PureStrategy a = testing::random_strategy(rng, tree, 1.0);
    const PureStrategy b = testing::random_strategy(rng, tree, 1.0);
    const Vec base = terminal_wealth(tree, a, 0.0);
    const Vec shifted = terminal_wealth(tree, a, 2.0);
    for (std::size_t j = 0; j < base.size(); ++j) CHECK(shifted[j] == doctest::Approx(base[j] + 2.0).epsilon(1e-15));

    PureStrategy mix = a;
    for (auto& [node, theta] : mix.allocation) {
      for (std::size_t k = 0; k < theta.size(); ++k) {
        theta[k] = 2.0 * a.allocation.at(node)[k] + 0.5 * b.allocation.at(node)[k];
      }
    }
    const Vec wa = terminal_wealth(tree, a, 0.0);
    const Vec wb = terminal_wealth(tree, b, 0.0);
    const Vec wm = terminal_wealth(tree, mix, 1.0);
    for (std::size_t j = 0; j < wm.size(); ++j) {
      CHECK(wm[j] == doctest::Approx(2.0 * wa[j] + 0.5 * wb[j] + 1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("iid builder multiplies branch probabilities") {
  const ScenarioTree two = coin_tree(2);
  CHECK(two.leaves().size() == 4);
  for (double p : two.leaf_probabilities()) CHECK(p == 0.25);

  const Pmf three{{0.5, {1.0}}, {0.25, {0.0}}, {0.25, {-1.0}}};
  const ScenarioTree tree = build_iid_market(three, 3);
  CHECK(tree.leaves().size() == 27);
  for (std::size_t j = 0; j < tree.leaves().size(); ++j) {
    double expected = 1.0;
    for (NodeId id = tree.leaves()[j]; tree.node(id).parent; id = *tree.node(id).parent) {
      expected *= tree.node(id).prob;
    }
    CHECK(tree.leaf_probabilities()[j] == expected);
  }
}

TEST_CASE("market text format round-trips") {
  const ScenarioTree tree = build_two_step_market(uniform_pmf(-1.0, 1.0, 4, Discretization::inner));
  std::ostringstream os;
  write_market(os, tree);
  std::istringstream in(os.str());
  const ScenarioTree back = parse_market(in);
  std::ostringstream again;
  write_market(again, back);
  CHECK(again.str() == os.str());

  std::istringstream broken("T=1 d=1\nnode 0 parent -1 p 1 dS 0\nnode 1 parent 0 p 0.5 dS 1\n");
  CHECK_THROWS_AS(parse_market(broken), ValidationError);
}

TEST_CASE("no-arbitrage check") {
  CHECK(check_no_arbitrage(coin_tree()).holds);
  CHECK(check_no_arbitrage(build_two_step_market(uniform_pmf(-1.0, 1.0, 50, Discretization::midpoint))).holds);

  const NoArbitrageResult up = check_no_arbitrage(one_step({{1.0}, {2.0}}));
  CHECK_FALSE(up.holds);
  REQUIRE(up.direction.size() == 1);
  CHECK(up.direction[0] > 0.0);

  const std::vector<Vec> inc{{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}};
  const NoArbitrageResult flat = check_no_arbitrage(one_step(inc));
  CHECK_FALSE(flat.holds);
  REQUIRE(flat.direction.size() == 2);
  double best = 0.0;
  for (const auto& x : inc) {
    const double gain = flat.direction[0] * x[0] + flat.direction[1] * x[1];
    CHECK(gain >= -1e-12);
    best = std::max(best, gain);
  }
  CHECK(best > 0.0);
  CHECK(flat.direction[0] == doctest::Approx(0.0));
  CHECK(flat.direction[1] > 0.0);

  CHECK(check_no_arbitrage(one_step({{1.0, 0.0}, {-1.0, 1.0}, {-1.0, -1.0}})).holds);
}

TEST_CASE("non-redundancy") {
  CHECK(check_non_redundancy(coin_tree()).holds);
  CHECK_FALSE(check_non_redundancy(one_step({{1.0}, {1.0}})).holds);
  CHECK_FALSE(check_non_redundancy(one_step({{1.0, 1.0}, {-1.0, -1.0}, {2.0, 2.0}})).holds);
  CHECK(check_non_redundancy(one_step({{1.0, 0.0}, {-1.0, 1.0}, {-1.0, -1.0}})).holds);
}

TEST_CASE("certificate on the coin market") {
  const ScenarioTree tree = coin_tree();
  const MarcheCertificate cert = marche_certificate(tree, {});
  CHECK(cert.per_node.at(0).kappa == 1.0);
  CHECK(cert.per_node.at(0).pi == 0.5);
  CHECK(validate_certificate(tree, 0, {1.0, 0.5}));
  CHECK_FALSE(validate_certificate(tree, 0, {1.01, 1e-9}));
  CHECK_THROWS_AS(marche_certificate(one_step({{1.0}, {2.0}}), {}), ValidationError);
}

TEST_CASE("d = 1 certificate is the smaller extreme with its mass") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const ScenarioTree tree = testing::random_tree(rng, 2, 1, 4);
    const MarcheCertificate cert = marche_certificate(tree, {});
    for (const auto& [node, pair] : cert.per_node) {
      double lo = 0.0;
      double hi = 0.0;
      for (NodeId c : tree.node(node).children) {
        lo = std::min(lo, tree.node(c).increment[0]);
        hi = std::max(hi, tree.node(c).increment[0]);
      }
      CHECK(pair.kappa == std::min(-lo, hi));
      CHECK(validate_certificate(tree, node, pair));
    }
  }
}

TEST_CASE("discretized two-step certificate") {
  const ScenarioTree tree = build_two_step_market(uniform_pmf(-1.0, 1.0, 1000, Discretization::inner));
  CHECK(validate_certificate(tree, 0, {0.5, 0.25}));
  for (NodeId id : tree.internal_nodes()) {
    if (id != 0) CHECK(validate_certificate(tree, id, {0.5, 0.5}));
  }
  CertificateOptions opts;
  opts.target_pi = 0.25;
  const MarcheCertificate cert = marche_certificate(tree, opts);
  CHECK(cert.per_node.at(0).kappa >= 0.49);
  CHECK(cert.per_node.at(0).kappa <= 0.5);
}

TEST_CASE("d = 2 certificate is sampled and validates") {
  const ScenarioTree tree = one_step({{1.0, 0.0}, {-1.0, 1.0}, {-1.0, -1.0}});
  const MarcheCertificate cert = marche_certificate(tree, {});
  CHECK(cert.sampled);
  CHECK(cert.per_node.at(0).kappa > 0.0);
  CHECK(validate_certificate(tree, 0, cert.per_node.at(0)));
  const auto dirs = sample_directions(2, 16, 0);
  for (const auto& d : dirs) CHECK(std::hypot(d[0], d[1]) == doctest::Approx(1.0));
}

TEST_CASE("sub-hedge reference check") {
  const ScenarioTree tree = coin_tree();
  ReferenceSpec ref = ReferenceSpec::constant(tree, 1.0);
  CHECK(validate_subhedge(tree, ref));
  ref.floor = 1.5;
  CHECK_FALSE(validate_subhedge(tree, ref));
  ref.floor = 0.0;
  ref.subhedge = PureStrategy::constant(tree, {1.0});
  CHECK(validate_subhedge(tree, ref));
  ref.subhedge = PureStrategy::constant(tree, {1.5});
  CHECK_FALSE(validate_subhedge(tree, ref));
}

TEST_CASE("uniform discretizations") {
  const Pmf mid = uniform_pmf(-1.0, 1.0, 4, Discretization::midpoint);
  REQUIRE(mid.size() == 4);
  CHECK(mid[0].value[0] == -0.75);
  CHECK(mid[3].value[0] == 0.75);
  const Pmf inner = uniform_pmf(-1.0, 1.0, 4, Discretization::inner);
  CHECK(inner[0].value[0] == -0.5);
  CHECK(inner[1].value[0] == 0.0);
  CHECK(inner[3].value[0] == 0.5);
  for (const auto& a : inner) CHECK(a.prob == 0.25);
}

TEST_CASE("discretized diffusion and exponential prices") {
  DiffusionSpec spec;
  spec.drift = [](const Vec&) { return Vec{0.1}; };
  spec.volatility = [](const Vec&) { return std::vector<Vec>{{1.0}}; };
  spec.noise = {{0.5, {1.0}}, {0.5, {-1.0}}};
  spec.initial_state = {0.0};
  const DiffusionTree d = build_discretized_diffusion(spec, 2, {0});
  CHECK_FALSE(d.ellipticity_warning);
  const ScenarioTree& tree = d.tree;
  CHECK(tree.leaves().size() == 4);
  const NodeId up = tree.node(0).children[0];
  CHECK(tree.node(up).state[0] == doctest::Approx(1.1));
  CHECK(tree.node(up).increment[0] == doctest::Approx(1.1));
  const NodeId upup = tree.node(up).children[0];
  CHECK(tree.node(upup).state[0] == doctest::Approx(2.2));

  const ScenarioTree prices = exponentiate_prices(tree);
  CHECK(prices.node(up).increment[0] == doctest::Approx(std::exp(1.1) - 1.0));
  CHECK(prices.node(upup).increment[0] == doctest::Approx(std::exp(2.2) - std::exp(1.1)));
  const NodeId down = tree.node(0).children[1];
  CHECK(prices.node(down).increment[0] == doctest::Approx(std::exp(-0.9) - 1.0));
  CHECK(prices.node(down).increment[0] < 0.0);

  DiffusionSpec walk = spec;
  walk.drift = [](const Vec&) { return Vec{0.0}; };
  const ScenarioTree rw = build_discretized_diffusion(walk, 1, {0}).tree;
  CHECK(rw.node(rw.node(0).children[0]).increment[0] == 1.0);
  CHECK(rw.node(rw.node(0).children[1]).increment[0] == -1.0);
}
