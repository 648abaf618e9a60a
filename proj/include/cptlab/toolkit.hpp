#pragma once

// Constructive randomization tools: splitting one uniform into several,
// conditional-quantile transport on finite joints, and (conditional)
// uniformization, plus the statistics used to check them.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cptlab/market.hpp"

namespace cptlab {

inline constexpr int kMantissaBits = 52;

/// Deals the first bits*l binary digits of u round-robin to l outputs:
/// digit k goes to output k mod l. Requires u in [0,1) and bits*l <= 52.
Vec split_uniform(double u, int l, int bits);

/// Inverse of split_uniform on its range: re-interleaves the first `bits`
/// digits of each part.
double interleave(std::span<const double> parts, int bits);

using BitString = std::vector<bool>;

/// Bit-string variant without a precision budget.
std::vector<BitString> split_bits(const BitString& digits, int l);
BitString interleave_bits(const std::vector<BitString>& parts);

// ---------------------------------------------------------------------------

struct JointAtom {
  Vec y;
  Vec z;
  double prob = 0.0;
};

/// Finite law mu(dy, dz). Probabilities sum to one within 1e-12; every y
/// and every z share one dimension.
class FiniteJoint {
 public:
  explicit FiniteJoint(std::vector<JointAtom> atoms);

  [[nodiscard]] std::span<const JointAtom> atoms() const { return atoms_; }
  /// Distinct y values in lexicographic order.
  [[nodiscard]] std::vector<Vec> y_support() const;
  /// delta(y): marginal mass of y (0 when off support).
  [[nodiscard]] double y_mass(const Vec& y) const;

 private:
  std::vector<JointAtom> atoms_;
};

struct ConditionalAtom {
  Vec z;
  double prob = 0.0;   // nu(y, {z})
  double upper = 0.0;  // cumulative conditional mass through this atom
};

/// nu(y, .) sorted lexicographically with merged ties; the last upper is 1.
std::vector<ConditionalAtom> conditional_law(const FiniteJoint& joint, const Vec& y);

/// Conditional quantile: the first atom (lexicographic order) whose
/// cumulative interval contains e. Rejects y off the support, naming the
/// nearest support point.
Vec transport(const FiniteJoint& joint, const Vec& y, double e);

// ---------------------------------------------------------------------------

using Cdf = std::function<double(double)>;
using ConditionalCdf = std::function<double(double x, double w)>;

struct CdfGrid {
  double lo = -50.0;
  double hi = 50.0;
  int points = 2001;
  /// A grid cell whose increase survives bisection down to `atom_width`
  /// with at least `atom_mass` is reported as an atom.
  double atom_mass = 1e-9;
  double atom_width = 1e-12;
};

struct CdfCheck {
  std::optional<double> atom_at;  // location of a detected atom
};

/// Rejects F unless it is nondecreasing with values in [0,1] on the grid.
CdfCheck check_cdf(const Cdf& F, const CdfGrid& grid = {});

/// F(x), rejecting values outside [0,1].
double uniformize(const Cdf& F, double x);

struct Uniformized {
  Vec u;
  bool atom_warning = false;
  std::string warning;  // "atomless required: ..." when flagged
};

/// Validates F on the grid, then maps every sample through it.
Uniformized uniformize(const Cdf& F, std::span<const double> xs, const CdfGrid& grid = {});

/// H(x_i | w_i) per sample. When `left_limit` (H(x- | w)) is given and the
/// conditional law has an atom at a sample, the randomized rank
/// H(x-|w) + V (H(x|w) - H(x-|w)) is used with V seeded, and flagged.
Uniformized conditional_uniformize(std::span<const double> x, std::span<const double> w,
                                   const ConditionalCdf& H,
                                   const ConditionalCdf& left_limit = {},
                                   std::uint64_t seed = 0);

/// Per-w empirical cdf (samples grouped by exact w). The empirical law is
/// discrete, so the randomized rank (#{x_j < x} + V #{x_j = x}) / n_w is
/// always used; the flag reports ties within a group.
Uniformized conditional_uniformize_empirical(std::span<const double> x,
                                             std::span<const double> w, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Statistics

struct TestStatistic {
  double statistic = 0.0;
  double critical = 0.0;
  int dof = 0;
  [[nodiscard]] bool passed() const { return statistic < critical; }
};

/// One-sample KS distance to U[0,1] against the asymptotic critical value
/// sqrt(-ln(alpha/2)/2)/sqrt(n).
TestStatistic ks_uniform(std::span<const double> u, double alpha = 0.01);

/// Pearson chi-square of independence on a bins x bins contingency table of
/// two samples in [0,1).
TestStatistic chi_square_independence(std::span<const double> a, std::span<const double> b,
                                      int bins, double alpha = 0.01);

/// Replaces each value by its rank bin (equal-count bins), for variables
/// not already on [0,1).
Vec rank_to_unit(std::span<const double> values);

/// Total variation between two finite joints (matching atoms exactly).
double total_variation(const FiniteJoint& a, const FiniteJoint& b);

/// Rebuilds mu from the y-marginal and transport evaluated at the midpoints
/// of the conditional breakpoint grid.
FiniteJoint reconstruct_by_transport(const FiniteJoint& joint);

// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kSelfTestSeed = 20240917;

struct SelfTestCase {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

struct SelfTestReport {
  std::uint64_t seed = 0;
  std::vector<SelfTestCase> cases;
  [[nodiscard]] bool passed() const;
};

/// Seeded statistical suite: splitting independence and marginals,
/// uniformization KS, conditional uniformization independence, and exact
/// transport reconstruction on random joints.
SelfTestReport run_self_test(std::uint64_t seed = kSelfTestSeed);

/// Random joint with at most `max_atoms` atoms on small integer grids.
FiniteJoint random_joint(std::uint64_t seed, int max_atoms = 20);

}  // namespace cptlab
