#include "cptlab/market.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "cptlab/format.hpp"
#include "detail/simplex.hpp"

namespace cptlab {

namespace {

std::string node_label(NodeId id) { return "node " + std::to_string(id); }

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Tree construction

TreeBuilder::TreeBuilder(int horizon, int asset_dim) : horizon_(horizon), dim_(asset_dim) {
  require(horizon >= 1, "horizon T must be >= 1");
  require(asset_dim >= 1, "asset dimension d must be >= 1");
}

NodeId TreeBuilder::add_root(Vec state) {
  require(nodes_.empty(), "root already added");
  Node root;
  root.id = 0;
  root.increment.assign(static_cast<std::size_t>(dim_), 0.0);
  root.state = std::move(state);
  nodes_.push_back(std::move(root));
  return 0;
}

NodeId TreeBuilder::add_child(NodeId parent, double prob, Vec increment, Vec state) {
  require(parent < nodes_.size(), "unknown parent " + node_label(parent));
  require(increment.size() == static_cast<std::size_t>(dim_),
          "increment of child of " + node_label(parent) + " has wrong dimension");
  require(nodes_[parent].depth < horizon_, node_label(parent) + " is already at depth T");
  Node n;
  n.id = nodes_.size();
  n.parent = parent;
  n.depth = nodes_[parent].depth + 1;
  n.prob = prob;
  n.increment = std::move(increment);
  n.state = std::move(state);
  nodes_[parent].children.push_back(n.id);
  nodes_.push_back(std::move(n));
  return nodes_.back().id;
}

ScenarioTree TreeBuilder::build() && {
  require(!nodes_.empty(), "tree has no root");
  const std::size_t state_dim = nodes_.front().state.size();
  for (const Node& n : nodes_) {
    require(n.state.size() == state_dim, node_label(n.id) + " has inconsistent state size");
    for (double v : n.increment) require(std::isfinite(v), node_label(n.id) + " has non-finite dS");
    if (n.parent) {
      require(n.prob > 0.0 && n.prob <= 1.0,
              node_label(n.id) + " has probability outside (0,1]");
    }
    if (n.children.empty()) {
      require(n.depth == horizon_, "leaf " + node_label(n.id) + " is not at depth T");
    } else {
      double s = 0.0;
      for (NodeId c : n.children) s += nodes_[c].prob;
      require(std::abs(s - 1.0) <= kProbabilityTolerance,
              "children of " + node_label(n.id) + " have probabilities summing to " +
                  format_double(s));
    }
  }

  ScenarioTree tree;
  tree.horizon_ = horizon_;
  tree.dim_ = dim_;
  tree.node_probs_.assign(nodes_.size(), 1.0);
  tree.internal_pos_.assign(nodes_.size(), -1);
  for (const Node& n : nodes_) {
    if (n.parent) tree.node_probs_[n.id] = tree.node_probs_[*n.parent] * n.prob;
    if (n.children.empty()) {
      tree.leaves_.push_back(n.id);
      tree.leaf_probs_.push_back(tree.node_probs_[n.id]);
    } else {
      tree.internal_pos_[n.id] = static_cast<std::ptrdiff_t>(tree.internal_.size());
      tree.internal_.push_back(n.id);
    }
  }
  tree.nodes_ = std::move(nodes_);
  return tree;
}

std::optional<std::size_t> ScenarioTree::internal_index(NodeId id) const {
  if (id >= internal_pos_.size() || internal_pos_[id] < 0) return std::nullopt;
  return static_cast<std::size_t>(internal_pos_[id]);
}

bool ScenarioTree::has_states() const { return !nodes_.front().state.empty(); }

// ---------------------------------------------------------------------------
// Strategies and wealth

PureStrategy PureStrategy::constant(const ScenarioTree& tree, const Vec& theta) {
  require(theta.size() == static_cast<std::size_t>(tree.dim()), "theta has wrong dimension");
  PureStrategy s;
  for (NodeId id : tree.internal_nodes()) s.allocation.emplace(id, theta);
  return s;
}

PureStrategy PureStrategy::zero(const ScenarioTree& tree) {
  return constant(tree, Vec(static_cast<std::size_t>(tree.dim()), 0.0));
}

RandomizedStrategy RandomizedStrategy::equal_weights(std::vector<PureStrategy> strategies) {
  require(!strategies.empty(), "randomized strategy needs at least one atom");
  RandomizedStrategy r;
  const double w = 1.0 / static_cast<double>(strategies.size());
  for (auto& s : strategies) r.atoms.emplace_back(w, std::move(s));
  return r;
}

void validate_strategy(const ScenarioTree& tree, const PureStrategy& strategy) {
  for (NodeId id : tree.internal_nodes()) {
    auto it = strategy.allocation.find(id);
    require(it != strategy.allocation.end(), "strategy is missing " + node_label(id));
    require(it->second.size() == static_cast<std::size_t>(tree.dim()),
            "strategy at " + node_label(id) + " has wrong dimension");
    for (double v : it->second) {
      require(std::isfinite(v), "strategy at " + node_label(id) + " is not finite");
    }
  }
  for (const auto& [id, theta] : strategy.allocation) {
    require(tree.internal_index(id).has_value(),
            "strategy allocates at " + node_label(id) + ", which is not a non-terminal node");
  }
}

void validate_strategy(const ScenarioTree& tree, const RandomizedStrategy& strategy) {
  require(!strategy.atoms.empty(), "randomized strategy needs at least one atom");
  double total = 0.0;
  for (const auto& [w, s] : strategy.atoms) {
    require(w > 0.0 && w <= 1.0, "randomized atom weight outside (0,1]");
    total += w;
    validate_strategy(tree, s);
  }
  require(std::abs(total - 1.0) <= kProbabilityTolerance,
          "randomized atom weights sum to " + format_double(total));
}

Vec flatten(const ScenarioTree& tree, const PureStrategy& strategy) {
  validate_strategy(tree, strategy);
  const auto d = static_cast<std::size_t>(tree.dim());
  Vec flat;
  flat.reserve(tree.internal_nodes().size() * d);
  for (NodeId id : tree.internal_nodes()) {
    const Vec& v = strategy.allocation.at(id);
    flat.insert(flat.end(), v.begin(), v.end());
  }
  return flat;
}

PureStrategy unflatten(const ScenarioTree& tree, std::span<const double> flat) {
  const auto d = static_cast<std::size_t>(tree.dim());
  require(flat.size() == tree.internal_nodes().size() * d, "flat strategy has wrong length");
  PureStrategy s;
  std::size_t k = 0;
  for (NodeId id : tree.internal_nodes()) {
    s.allocation.emplace(id, Vec(flat.begin() + static_cast<std::ptrdiff_t>(k),
                                 flat.begin() + static_cast<std::ptrdiff_t>(k + d)));
    k += d;
  }
  return s;
}

void terminal_wealth_flat(const ScenarioTree& tree, std::span<const double> flat, double x0,
                          std::span<double> out_leaf_wealth) {
  const auto d = static_cast<std::size_t>(tree.dim());
  const auto nodes = tree.nodes();
  // Parents precede children, so a single forward pass suffices.
  std::vector<double> wealth(nodes.size());
  wealth[0] = x0;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const Node& n = nodes[i];
    const std::size_t pos = *tree.internal_index(*n.parent);
    wealth[i] = wealth[*n.parent] + dot(flat.subspan(pos * d, d), n.increment);
  }
  const auto leaves = tree.leaves();
  for (std::size_t j = 0; j < leaves.size(); ++j) out_leaf_wealth[j] = wealth[leaves[j]];
}

Vec terminal_wealth(const ScenarioTree& tree, const PureStrategy& strategy, double x0) {
  const Vec flat = flatten(tree, strategy);
  Vec out(tree.leaves().size());
  terminal_wealth_flat(tree, flat, x0, out);
  return out;
}

ReferenceSpec ReferenceSpec::constant(const ScenarioTree& tree, double c) {
  return {Vec(tree.leaves().size(), c), PureStrategy::zero(tree), c};
}

bool validate_subhedge(const ScenarioTree& tree, const ReferenceSpec& ref) {
  require(ref.benchmark.size() == tree.leaves().size(),
          "reference benchmark must have one value per leaf");
  const Vec hedge = terminal_wealth(tree, ref.subhedge, ref.floor);
  for (std::size_t j = 0; j < hedge.size(); ++j) {
    if (hedge[j] > ref.benchmark[j]) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Builders

namespace {

Pmf normalized_pmf(const Pmf& pmf, std::size_t dim) {
  require(!pmf.empty(), "pmf is empty");
  double total = 0.0;
  for (const auto& a : pmf) {
    require(a.prob > 0.0, "pmf atom with nonpositive probability");
    require(a.value.size() == dim, "pmf atoms have inconsistent dimension");
    total += a.prob;
  }
  require(std::abs(total - 1.0) <= 1e-9, "pmf probabilities sum to " + format_double(total));
  Pmf out = pmf;
  for (auto& a : out) a.prob /= total;
  return out;
}

}  // namespace

ScenarioTree build_iid_market(const Pmf& increments, int horizon) {
  require(!increments.empty(), "pmf is empty");
  const std::size_t dim = increments.front().value.size();
  const Pmf pmf = normalized_pmf(increments, dim);
  TreeBuilder b(horizon, static_cast<int>(dim));
  std::vector<NodeId> frontier{b.add_root()};
  for (int t = 0; t < horizon; ++t) {
    std::vector<NodeId> next;
    next.reserve(frontier.size() * pmf.size());
    for (NodeId parent : frontier) {
      for (const auto& a : pmf) next.push_back(b.add_child(parent, a.prob, a.value));
    }
    frontier = std::move(next);
  }
  return std::move(b).build();
}

Pmf uniform_pmf(double lo, double hi, int atoms, Discretization scheme) {
  require(hi > lo, "uniform_pmf needs lo < hi");
  require(atoms >= 1, "uniform_pmf needs at least one atom");
  Pmf pmf;
  const double width = (hi - lo) / atoms;
  for (int j = 0; j < atoms; ++j) {
    const double left = lo + width * j;
    const double right = lo + width * (j + 1);
    double x = 0.5 * (left + right);
    if (scheme == Discretization::inner) {
      if (right <= 0.0) {
        x = right;
      } else if (left >= 0.0) {
        x = left;
      } else {
        x = 0.0;
      }
    }
    pmf.push_back({1.0 / atoms, {x}});
  }
  return pmf;
}

ScenarioTree build_two_step_market(const Pmf& first) {
  require(!first.empty(), "pmf is empty");
  const Pmf pmf = normalized_pmf(first, 1);
  TreeBuilder b(2, 1);
  const NodeId root = b.add_root();
  for (const auto& a : pmf) {
    const NodeId mid = b.add_child(root, a.prob, a.value);
    b.add_child(mid, 0.5, {1.0});
    b.add_child(mid, 0.5, {-1.0});
  }
  return std::move(b).build();
}

DiffusionTree build_discretized_diffusion(const DiffusionSpec& spec, int horizon,
                                          const std::vector<std::size_t>& traded,
                                          std::uint64_t spot_check_seed) {
  const auto L = static_cast<std::size_t>(spec.state_dim);
  const auto N = static_cast<std::size_t>(spec.noise_dim);
  require(spec.state_dim >= 1 && spec.noise_dim >= 1, "diffusion dimensions must be >= 1");
  require(spec.drift && spec.volatility, "diffusion needs drift and volatility");
  require(spec.ellipticity > 0.0, "ellipticity floor h must be > 0");
  require(spec.initial_state.size() == L, "initial state has wrong dimension");
  require(!traded.empty() && traded.size() <= L, "traded index set must have size 1..L");
  for (std::size_t idx : traded) require(idx < L, "traded index out of range");
  const Pmf noise = normalized_pmf(spec.noise, N);

  std::mt19937_64 rng(spot_check_seed);
  std::normal_distribution<double> gauss;
  bool warn = false;
  auto spot_check = [&](const Vec& x) {
    const auto nu = spec.volatility(x);
    require(nu.size() == L, "volatility must return L rows");
    for (int trial = 0; trial < 8; ++trial) {
      Vec v(L);
      for (double& c : v) c = gauss(rng);
      double vv = 0.0;
      for (double c : v) vv += c * c;
      double q = 0.0;  // |nu^T v|^2 = v^T nu nu^T v
      for (std::size_t n = 0; n < N; ++n) {
        double s = 0.0;
        for (std::size_t l = 0; l < L; ++l) s += nu[l].at(n) * v[l];
        q += s * s;
      }
      if (q < spec.ellipticity * vv * (1.0 - 1e-12)) warn = true;
    }
  };

  TreeBuilder b(horizon, static_cast<int>(traded.size()));
  std::vector<std::pair<NodeId, Vec>> frontier{{b.add_root(spec.initial_state), spec.initial_state}};
  for (int t = 0; t < horizon; ++t) {
    std::vector<std::pair<NodeId, Vec>> next;
    for (const auto& [parent, y] : frontier) {
      spot_check(y);
      const Vec mu = spec.drift(y);
      const auto nu = spec.volatility(y);
      require(mu.size() == L, "drift must return L values");
      for (const auto& z : noise) {
        Vec y_next(L);
        for (std::size_t l = 0; l < L; ++l) {
          double s = y[l] + mu[l];
          for (std::size_t n = 0; n < N; ++n) s += nu[l].at(n) * z.value[n];
          y_next[l] = s;
        }
        Vec ds(traded.size());
        for (std::size_t k = 0; k < traded.size(); ++k) ds[k] = y_next[traded[k]] - y[traded[k]];
        next.emplace_back(b.add_child(parent, z.prob, std::move(ds), y_next), y_next);
      }
    }
    frontier = std::move(next);
  }
  return {std::move(b).build(), warn, traded};
}

ScenarioTree exponentiate_prices(const ScenarioTree& tree) {
  require(tree.has_states(), "exponentiate_prices needs a tree carrying states");
  require(tree.node(0).state.size() == 1, "exponentiate_prices needs a scalar state");
  TreeBuilder b(tree.horizon(), 1);
  b.add_root(tree.node(0).state);
  for (const Node& n : tree.nodes().subspan(1)) {
    const double y_prev = tree.node(*n.parent).state[0];
    const double y = n.state[0];
    b.add_child(*n.parent, n.prob, {std::exp(y) - std::exp(y_prev)}, n.state);
  }
  return std::move(b).build();
}

// ---------------------------------------------------------------------------
// Arbitrage conditions

namespace {

struct ChildAtom {
  double prob;
  std::span<const double> dS;
};

std::vector<ChildAtom> child_atoms(const ScenarioTree& tree, NodeId id) {
  std::vector<ChildAtom> out;
  for (NodeId c : tree.node(id).children) {
    const Node& n = tree.node(c);
    out.push_back({n.prob, n.increment});
  }
  return out;
}

// Arbitrage direction at one node, if any: xi . x_i >= 0 for all atoms with
// a strictly positive term.
std::optional<Vec> one_step_arbitrage(const std::vector<ChildAtom>& atoms, std::size_t d) {
  if (d == 1) {
    bool pos = false;
    bool neg = false;
    for (const auto& a : atoms) {
      pos = pos || a.dS[0] > 0.0;
      neg = neg || a.dS[0] < 0.0;
    }
    if (pos && !neg) return Vec{1.0};
    if (neg && !pos) return Vec{-1.0};
    return std::nullopt;
  }

  // maximize sum_i xi.x_i  s.t.  xi.x_i >= 0,  -1 <= xi_k <= 1, with
  // xi = y+ - y-, y+- in [0,1]^d.
  double scale = 0.0;
  for (const auto& a : atoms) {
    for (double v : a.dS) scale = std::max(scale, std::abs(v));
  }
  if (scale == 0.0) return std::nullopt;

  std::vector<std::vector<double>> A;
  std::vector<double> rhs;
  Vec total(d, 0.0);
  for (const auto& a : atoms) {
    std::vector<double> row(2 * d);
    for (std::size_t k = 0; k < d; ++k) {
      const double x = a.dS[k] / scale;
      row[k] = -x;
      row[d + k] = x;
      total[k] += x;
    }
    A.push_back(std::move(row));
    rhs.push_back(0.0);
  }
  for (std::size_t k = 0; k < 2 * d; ++k) {
    std::vector<double> row(2 * d, 0.0);
    row[k] = 1.0;
    A.push_back(std::move(row));
    rhs.push_back(1.0);
  }
  std::vector<double> c(2 * d);
  for (std::size_t k = 0; k < d; ++k) {
    c[k] = total[k];
    c[d + k] = -total[k];
  }
  const auto lp = detail::simplex_max(A, rhs, c);
  if (!lp.bounded || lp.objective <= 1e-9) return std::nullopt;

  Vec xi(d);
  for (std::size_t k = 0; k < d; ++k) xi[k] = lp.solution[k] - lp.solution[d + k];
  // Confirm the witness directly on the atoms.
  bool positive = false;
  for (const auto& a : atoms) {
    const double v = dot(xi, a.dS) / scale;
    if (v < -1e-9) return std::nullopt;
    positive = positive || v > 1e-9;
  }
  if (!positive) return std::nullopt;
  return xi;
}

}  // namespace

NoArbitrageResult check_no_arbitrage(const ScenarioTree& tree) {
  const auto d = static_cast<std::size_t>(tree.dim());
  for (NodeId id : tree.internal_nodes()) {
    if (auto xi = one_step_arbitrage(child_atoms(tree, id), d)) {
      return {false, id, std::move(*xi)};
    }
  }
  return {};
}

NonRedundancyResult check_non_redundancy(const ScenarioTree& tree) {
  const auto d = static_cast<std::size_t>(tree.dim());
  for (NodeId id : tree.internal_nodes()) {
    const auto atoms = child_atoms(tree, id);
    if (atoms.size() < d + 1) return {false, id};
    Eigen::MatrixXd m(static_cast<Eigen::Index>(atoms.size() - 1), static_cast<Eigen::Index>(d));
    for (std::size_t i = 1; i < atoms.size(); ++i) {
      for (std::size_t k = 0; k < d; ++k) {
        m(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(k)) =
            atoms[i].dS[k] - atoms[0].dS[k];
      }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    if (static_cast<std::size_t>(lu.rank()) < d) return {false, id};
  }
  return {};
}

std::vector<Vec> sample_directions(int dim, int count, std::uint64_t seed) {
  require(dim >= 1, "direction dimension must be >= 1");
  const auto d = static_cast<std::size_t>(dim);
  std::vector<Vec> dirs;
  if (dim == 1) return {{1.0}, {-1.0}};
  for (std::size_t k = 0; k < d; ++k) {
    Vec e(d, 0.0);
    e[k] = 1.0;
    dirs.push_back(e);
    e[k] = -1.0;
    dirs.push_back(e);
  }
  if (dim == 2) {
    for (int j = 0; j < count; ++j) {
      const double angle = 2.0 * std::numbers::pi * (j + 0.5) / count;
      dirs.push_back({std::cos(angle), std::sin(angle)});
    }
    return dirs;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  for (int j = 0; j < count; ++j) {
    Vec v(d);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& c : v) {
        c = gauss(rng);
        norm += c * c;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (double& c : v) c /= norm;
    dirs.push_back(std::move(v));
  }
  return dirs;
}

namespace {

struct Projection {
  double value;
  double prob;
};

std::vector<Projection> project(const std::vector<ChildAtom>& atoms, const Vec& xi) {
  std::vector<Projection> out;
  out.reserve(atoms.size());
  for (const auto& a : atoms) out.push_back({dot(xi, a.dS), a.prob});
  std::sort(out.begin(), out.end(),
            [](const Projection& l, const Projection& r) { return l.value < r.value; });
  return out;
}

double mass_at_or_below(const std::vector<Projection>& sorted, double level) {
  double s = 0.0;
  for (const auto& p : sorted) {
    if (p.value > level) break;
    s += p.prob;
  }
  return s;
}

// Largest kappa with P(proj <= -kappa) >= pi: minus the pi-quantile.
double kappa_at(const std::vector<Projection>& sorted, double pi) {
  double cum = 0.0;
  for (const auto& p : sorted) {
    cum += p.prob;
    if (cum >= pi - kProbabilityTolerance) return -p.value;
  }
  return -sorted.back().value;
}

}  // namespace

MarcheCertificate marche_certificate(const ScenarioTree& tree, const CertificateOptions& options) {
  const auto na = check_no_arbitrage(tree);
  if (!na.holds) {
    throw ValidationError("no-arbitrage fails at " + node_label(*na.node) +
                          "; no (kappa, pi) certificate exists");
  }
  if (options.target_pi) {
    require(*options.target_pi > 0.0 && *options.target_pi <= 1.0, "target pi must be in (0,1]");
  }
  const auto dirs = sample_directions(tree.dim(), options.direction_samples, options.seed);

  MarcheCertificate cert;
  cert.sampled = tree.dim() >= 2;
  cert.direction_samples = tree.dim() >= 2 ? static_cast<int>(dirs.size()) : 2;
  for (NodeId id : tree.internal_nodes()) {
    const auto atoms = child_atoms(tree, id);
    std::vector<std::vector<Projection>> projections;
    projections.reserve(dirs.size());
    for (const auto& xi : dirs) projections.push_back(project(atoms, xi));

    NodeCertificate nc;
    if (options.target_pi) {
      nc.pi = *options.target_pi;
      nc.kappa = std::numeric_limits<double>::infinity();
      for (const auto& proj : projections) nc.kappa = std::min(nc.kappa, kappa_at(proj, nc.pi));
    } else {
      nc.kappa = std::numeric_limits<double>::infinity();
      for (const auto& proj : projections) nc.kappa = std::min(nc.kappa, -proj.front().value);
      nc.pi = 1.0;
      for (const auto& proj : projections) {
        nc.pi = std::min(nc.pi, mass_at_or_below(proj, -nc.kappa));
      }
    }
    if (!(nc.kappa > 0.0) || !(nc.pi > 0.0)) {
      throw ValidationError("no positive (kappa, pi) at " + node_label(id) +
                            " for the requested pi");
    }
    cert.per_node.emplace(id, nc);
  }
  return cert;
}

bool validate_certificate(const ScenarioTree& tree, NodeId node, const NodeCertificate& pair,
                          int direction_samples, std::uint64_t seed) {
  require(tree.internal_index(node).has_value(), node_label(node) + " is not a non-terminal node");
  if (!(pair.kappa > 0.0) || !(pair.pi > 0.0) || pair.pi > 1.0) return false;
  const auto atoms = child_atoms(tree, node);
  for (const auto& xi : sample_directions(tree.dim(), direction_samples, seed)) {
    if (mass_at_or_below(project(atoms, xi), -pair.kappa) < pair.pi - kProbabilityTolerance) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Text formats

namespace {

std::string strip_comment(const std::string& line) {
  const auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

double parse_number(const std::string& tok, int line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("line " + std::to_string(line_no) + ": bad number '" + tok + "'");
  }
}

long long parse_integer(const std::string& tok, int line_no) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("line " + std::to_string(line_no) + ": bad integer '" + tok + "'");
  }
}

void expect_keyword(std::istream& in, const char* keyword, int line_no) {
  std::string tok;
  if (!(in >> tok) || tok != keyword) {
    throw ValidationError("line " + std::to_string(line_no) + ": expected '" + keyword + "'");
  }
}

}  // namespace

ScenarioTree parse_market(std::istream& in) {
  std::string line;
  int line_no = 0;
  int horizon = -1;
  int dim = -1;
  struct Raw {
    long long parent;
    double prob;
    Vec dS;
    Vec state;
  };
  std::map<long long, Raw> raw;

  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(strip_comment(line));
    std::string tok;
    if (!(ls >> tok)) continue;
    if (horizon < 0) {
      std::string tok2;
      if (tok.rfind("T=", 0) != 0 || !(ls >> tok2) || tok2.rfind("d=", 0) != 0) {
        throw ValidationError("line " + std::to_string(line_no) + ": expected header 'T=<int> d=<int>'");
      }
      horizon = static_cast<int>(parse_integer(tok.substr(2), line_no));
      dim = static_cast<int>(parse_integer(tok2.substr(2), line_no));
      require(horizon >= 1 && dim >= 1, "header needs T >= 1 and d >= 1");
      continue;
    }
    if (tok != "node") {
      throw ValidationError("line " + std::to_string(line_no) + ": expected 'node'");
    }
    ls >> tok;
    const long long id = parse_integer(tok, line_no);
    expect_keyword(ls, "parent", line_no);
    ls >> tok;
    Raw r;
    r.parent = parse_integer(tok, line_no);
    expect_keyword(ls, "p", line_no);
    ls >> tok;
    r.prob = parse_number(tok, line_no);
    expect_keyword(ls, "dS", line_no);
    for (int k = 0; k < dim; ++k) {
      if (!(ls >> tok)) {
        throw ValidationError("line " + std::to_string(line_no) + ": expected " +
                              std::to_string(dim) + " dS values");
      }
      r.dS.push_back(parse_number(tok, line_no));
    }
    if (ls >> tok) {
      if (tok != "state") {
        throw ValidationError("line " + std::to_string(line_no) + ": unexpected '" + tok + "'");
      }
      while (ls >> tok) r.state.push_back(parse_number(tok, line_no));
    }
    require(!raw.contains(id), "line " + std::to_string(line_no) + ": duplicate node id");
    raw.emplace(id, std::move(r));
  }
  require(horizon >= 1, "market file has no header");
  require(!raw.empty(), "market file has no nodes");

  TreeBuilder b(horizon, dim);
  long long expected = 0;
  for (auto& [id, r] : raw) {
    require(id == expected, "node ids must be 0..n-1 (missing " + std::to_string(expected) + ")");
    if (id == 0) {
      require(r.parent == -1, "node 0 must be the root (parent -1)");
      b.add_root(std::move(r.state));
    } else {
      require(r.parent >= 0 && r.parent < id,
              "node " + std::to_string(id) + " must name an earlier parent");
      b.add_child(static_cast<NodeId>(r.parent), r.prob, std::move(r.dS), std::move(r.state));
    }
    ++expected;
  }
  return std::move(b).build();
}

void write_market(std::ostream& out, const ScenarioTree& tree) {
  out << "T=" << tree.horizon() << " d=" << tree.dim() << '\n';
  for (const Node& n : tree.nodes()) {
    out << "node " << n.id << " parent ";
    if (n.parent) {
      out << *n.parent;
    } else {
      out << -1;
    }
    out << " p " << format_double(n.prob) << " dS";
    for (double v : n.increment) out << ' ' << format_double(v);
    if (!n.state.empty()) {
      out << " state";
      for (double v : n.state) out << ' ' << format_double(v);
    }
    out << '\n';
  }
}

Pmf parse_pmf(std::istream& in) {
  Pmf pmf;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(strip_comment(line));
    std::string tok;
    if (!(ls >> tok)) continue;
    if (tok != "atom") {
      throw ValidationError("line " + std::to_string(line_no) + ": expected 'atom'");
    }
    PmfAtom a;
    if (!(ls >> tok)) throw ValidationError("line " + std::to_string(line_no) + ": missing probability");
    a.prob = parse_number(tok, line_no);
    while (ls >> tok) a.value.push_back(parse_number(tok, line_no));
    require(!a.value.empty(), "line " + std::to_string(line_no) + ": atom without value");
    pmf.push_back(std::move(a));
  }
  require(!pmf.empty(), "pmf file has no atoms");
  return pmf;
}

void write_pmf(std::ostream& out, const Pmf& pmf) {
  for (const auto& a : pmf) {
    out << "atom " << format_double(a.prob);
    for (double v : a.value) out << ' ' << format_double(v);
    out << '\n';
  }
}

}  // namespace cptlab
