#pragma once

// Finite multiperiod markets as scenario trees: wealth dynamics, builders
// (i.i.d., discretized diffusions, exponential prices), the one-step
// no-arbitrage test and the (kappa, pi) strong no-arbitrage certificate.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cptlab/error.hpp"

namespace cptlab {

using Vec = std::vector<double>;
using NodeId = std::size_t;

/// Tolerance on "probabilities sum to one" for tree and strategy checks.
inline constexpr double kProbabilityTolerance = 1e-12;

struct Node {
  NodeId id = 0;
  std::optional<NodeId> parent;  // empty for the root
  int depth = 0;
  double prob = 1.0;    // transition probability from the parent
  Vec increment;        // price increment on the edge parent -> node
  Vec state;            // optional underlying state (diffusion builders)
  std::vector<NodeId> children;
};

class ScenarioTree;

/// Incremental construction; `build()` validates every tree invariant.
/// Parents are always created before their children, so node ids are a
/// topological order.
class TreeBuilder {
 public:
  TreeBuilder(int horizon, int asset_dim);

  NodeId add_root(Vec state = {});
  NodeId add_child(NodeId parent, double prob, Vec increment, Vec state = {});

  [[nodiscard]] ScenarioTree build() &&;

 private:
  int horizon_;
  int dim_;
  std::vector<Node> nodes_;
};

/// Finite event tree. Depth equals the time index; every leaf sits at
/// depth `horizon()`. Immutable once built.
class ScenarioTree {
 public:
  [[nodiscard]] int horizon() const { return horizon_; }
  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] std::size_t size() const { return nodes_.size(); }
  [[nodiscard]] const Node& node(NodeId id) const { return nodes_.at(id); }
  [[nodiscard]] std::span<const Node> nodes() const { return nodes_; }

  /// Non-terminal nodes in id order; these carry the strategy.
  [[nodiscard]] std::span<const NodeId> internal_nodes() const { return internal_; }
  [[nodiscard]] std::span<const NodeId> leaves() const { return leaves_; }

  /// Unconditional probability of reaching each leaf, aligned with leaves().
  [[nodiscard]] std::span<const double> leaf_probabilities() const { return leaf_probs_; }
  /// Unconditional probability of every node, indexed by id.
  [[nodiscard]] std::span<const double> node_probabilities() const { return node_probs_; }

  /// Position of an internal node inside internal_nodes(), or nullopt.
  [[nodiscard]] std::optional<std::size_t> internal_index(NodeId id) const;

  [[nodiscard]] bool has_states() const;

 private:
  friend class TreeBuilder;
  ScenarioTree() = default;

  int horizon_ = 0;
  int dim_ = 0;
  std::vector<Node> nodes_;
  std::vector<NodeId> internal_;
  std::vector<NodeId> leaves_;
  std::vector<double> leaf_probs_;
  std::vector<double> node_probs_;
  std::vector<std::ptrdiff_t> internal_pos_;
};

/// Predictable allocation: one vector theta_{t+1} per non-terminal node at
/// depth t.
struct PureStrategy {
  std::map<NodeId, Vec> allocation;

  /// Same vector at every internal node.
  static PureStrategy constant(const ScenarioTree& tree, const Vec& theta);
  static PureStrategy zero(const ScenarioTree& tree);
};

/// Mixture of pure strategies driven by an external uniform, discretized
/// into finitely many atoms.
struct RandomizedStrategy {
  std::vector<std::pair<double, PureStrategy>> atoms;

  static RandomizedStrategy equal_weights(std::vector<PureStrategy> strategies);
};

/// Throws ValidationError naming the first offending node.
void validate_strategy(const ScenarioTree& tree, const PureStrategy& strategy);
void validate_strategy(const ScenarioTree& tree, const RandomizedStrategy& strategy);

/// Strategy packed as internal_nodes() x dim() doubles, row-major.
Vec flatten(const ScenarioTree& tree, const PureStrategy& strategy);
PureStrategy unflatten(const ScenarioTree& tree, std::span<const double> flat);

/// Terminal wealth X0 + sum_t theta_{t+1} . dS_{t+1}, aligned with leaves().
Vec terminal_wealth(const ScenarioTree& tree, const PureStrategy& strategy, double x0);
/// Unchecked fast path over a flattened strategy. `flat` must have
/// internal_nodes().size() * dim() entries.
void terminal_wealth_flat(const ScenarioTree& tree, std::span<const double> flat, double x0,
                          std::span<double> out_leaf_wealth);

/// Reference point B with a sub-hedge (phi, b): b + sum phi dS <= B leafwise.
struct ReferenceSpec {
  Vec benchmark;  // aligned with leaves()
  PureStrategy subhedge;
  double floor = 0.0;

  /// B == c with phi = 0 and b = c.
  static ReferenceSpec constant(const ScenarioTree& tree, double c);
};

[[nodiscard]] bool validate_subhedge(const ScenarioTree& tree, const ReferenceSpec& ref);

// ---------------------------------------------------------------------------
// Builders

struct PmfAtom {
  double prob = 0.0;
  Vec value;
};
using Pmf = std::vector<PmfAtom>;

/// Product tree: every node branches on the same increment law.
/// Probabilities within 1e-9 of summing to one are renormalized.
ScenarioTree build_iid_market(const Pmf& increments, int horizon);

/// Equal-mass discretization of the uniform law on [lo, hi].
enum class Discretization {
  midpoint,  // cell midpoints
  inner,     // cell endpoint nearest zero; never overstates |dS| tails
};
Pmf uniform_pmf(double lo, double hi, int atoms, Discretization scheme);

/// Two-step market: dS_1 from `first`, then a fair +-1 coin.
ScenarioTree build_two_step_market(const Pmf& first);

struct DiffusionSpec {
  int state_dim = 1;
  int noise_dim = 1;
  std::function<Vec(const Vec&)> drift;                    // R^L -> R^L
  std::function<std::vector<Vec>(const Vec&)> volatility;  // R^L -> L x N rows
  double ellipticity = 1.0;                                // h > 0
  Pmf noise;                                               // law of Z_t
  Vec initial_state;
};

struct DiffusionTree {
  ScenarioTree tree;
  bool ellipticity_warning = false;  // spot-check failed somewhere
  std::vector<std::size_t> traded;
};

/// Y_{t+1} = Y_t + mu(Y_t) + nu(Y_t) Z_{t+1}; dS is the increment of the
/// traded coordinates. Node states hold Y.
DiffusionTree build_discretized_diffusion(const DiffusionSpec& spec, int horizon,
                                          const std::vector<std::size_t>& traded,
                                          std::uint64_t spot_check_seed = 0);

/// S_t := exp(Y_t) for a scalar state tree.
ScenarioTree exponentiate_prices(const ScenarioTree& tree);

// ---------------------------------------------------------------------------
// Arbitrage conditions

struct NoArbitrageResult {
  bool holds = true;
  std::optional<NodeId> node;  // witness node when !holds
  Vec direction;               // xi with xi . dS >= 0 at every child, > 0 somewhere
};

/// One-step no-arbitrage at every internal node (sufficient on finite trees).
NoArbitrageResult check_no_arbitrage(const ScenarioTree& tree);

/// Condition (R): >= 2 distinct atoms (d = 1) or affinely spanning atoms.
struct NonRedundancyResult {
  bool holds = true;
  std::optional<NodeId> node;
};
NonRedundancyResult check_non_redundancy(const ScenarioTree& tree);

struct NodeCertificate {
  double kappa = 0.0;
  double pi = 0.0;
};

struct MarcheCertificate {
  std::map<NodeId, NodeCertificate> per_node;
  bool sampled = false;  // d >= 2: only the sampled directions were checked
  int direction_samples = 0;
};

struct CertificateOptions {
  int direction_samples = 256;
  /// When set, kappa is maximized subject to pi >= target_pi. Otherwise
  /// kappa is the smallest extreme loss over directions and pi its mass.
  std::optional<double> target_pi;
  std::uint64_t seed = 0;
};

/// Throws ValidationError when no-arbitrage fails (message names the node).
MarcheCertificate marche_certificate(const ScenarioTree& tree, const CertificateOptions& options);

/// Checks P(xi . dS <= -kappa | node) >= pi for all (tested) unit xi.
bool validate_certificate(const ScenarioTree& tree, NodeId node, const NodeCertificate& pair,
                          int direction_samples = 256, std::uint64_t seed = 0);

/// Unit directions used for d >= 2 (deterministic given seed). Includes the
/// signed coordinate axes.
std::vector<Vec> sample_directions(int dim, int count, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Text formats

/// Header `T=<int> d=<int>`, then `node <id> parent <id> p <f> dS <f>...`
/// (optionally followed by `state <f>...`). The root uses parent -1.
ScenarioTree parse_market(std::istream& in);
void write_market(std::ostream& out, const ScenarioTree& tree);

/// Lines `atom <prob> <f>...`; `#` starts a comment.
Pmf parse_pmf(std::istream& in);
void write_pmf(std::ostream& out, const Pmf& pmf);

}  // namespace cptlab
