#include "cptlab/toolkit.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "cptlab/format.hpp"

namespace cptlab {

namespace {

std::uint64_t leading_digits(double u, int count) {
  return static_cast<std::uint64_t>(std::floor(std::ldexp(u, count)));
}

void check_budget(int l, int bits) {
  require(l >= 1, "split needs l >= 1");
  require(bits >= 1, "split needs bits >= 1");
  require(static_cast<long long>(bits) * l <= kMantissaBits,
          "bits * l = " + std::to_string(static_cast<long long>(bits) * l) +
              " exceeds the 52-bit budget; use the bit-string variant");
}

std::string format_vec(const Vec& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) s += ", ";
    s += format_double(v[i]);
  }
  return s + ")";
}

}  // namespace

Vec split_uniform(double u, int l, int bits) {
  check_budget(l, bits);
  require(u >= 0.0 && u < 1.0, "split_uniform needs u in [0,1)");
  const int total = bits * l;
  const std::uint64_t m = leading_digits(u, total);
  Vec out(static_cast<std::size_t>(l), 0.0);
  for (int k = 0; k < total; ++k) {
    if ((m >> (total - 1 - k)) & 1U) {
      out[static_cast<std::size_t>(k % l)] += std::ldexp(1.0, -(k / l + 1));
    }
  }
  return out;
}

double interleave(std::span<const double> parts, int bits) {
  const int l = static_cast<int>(parts.size());
  check_budget(l, bits);
  double u = 0.0;
  for (int j = 0; j < l; ++j) {
    const double part = parts[static_cast<std::size_t>(j)];
    require(part >= 0.0 && part < 1.0, "interleave needs parts in [0,1)");
    const std::uint64_t m = leading_digits(part, bits);
    for (int p = 0; p < bits; ++p) {
      if ((m >> (bits - 1 - p)) & 1U) u += std::ldexp(1.0, -(p * l + j + 1));
    }
  }
  return u;
}

std::vector<BitString> split_bits(const BitString& digits, int l) {
  require(l >= 1, "split needs l >= 1");
  std::vector<BitString> out(static_cast<std::size_t>(l));
  for (std::size_t k = 0; k < digits.size(); ++k) {
    out[k % static_cast<std::size_t>(l)].push_back(digits[k]);
  }
  return out;
}

BitString interleave_bits(const std::vector<BitString>& parts) {
  require(!parts.empty(), "interleave needs at least one part");
  BitString out;
  for (std::size_t p = 0;; ++p) {
    for (const auto& part : parts) {
      if (p >= part.size()) return out;
      out.push_back(part[p]);
    }
  }
}

// ---------------------------------------------------------------------------

FiniteJoint::FiniteJoint(std::vector<JointAtom> atoms) : atoms_(std::move(atoms)) {
  require(!atoms_.empty(), "joint law needs at least one atom");
  const std::size_t ny = atoms_.front().y.size();
  const std::size_t nz = atoms_.front().z.size();
  double total = 0.0;
  for (const auto& a : atoms_) {
    require(a.y.size() == ny && a.z.size() == nz, "joint atoms have inconsistent dimensions");
    require(a.prob > 0.0 && a.prob <= 1.0, "joint atom probability outside (0,1]");
    for (double v : a.y) require(std::isfinite(v), "joint atom has a non-finite y");
    for (double v : a.z) require(std::isfinite(v), "joint atom has a non-finite z");
    total += a.prob;
  }
  require(std::abs(total - 1.0) <= kProbabilityTolerance,
          "joint probabilities sum to " + format_double(total));
}

std::vector<Vec> FiniteJoint::y_support() const {
  std::vector<Vec> ys;
  for (const auto& a : atoms_) ys.push_back(a.y);
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  return ys;
}

double FiniteJoint::y_mass(const Vec& y) const {
  double m = 0.0;
  for (const auto& a : atoms_) {
    if (a.y == y) m += a.prob;
  }
  return m;
}

std::vector<ConditionalAtom> conditional_law(const FiniteJoint& joint, const Vec& y) {
  std::vector<ConditionalAtom> law;
  double mass = 0.0;
  for (const auto& a : joint.atoms()) {
    if (a.y == y) {
      law.push_back({a.z, a.prob, 0.0});
      mass += a.prob;
    }
  }
  if (law.empty()) {
    const auto support = joint.y_support();
    const Vec* nearest = &support.front();
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : support) {
      double d = 0.0;
      for (std::size_t k = 0; k < s.size() && k < y.size(); ++k) d += (s[k] - y[k]) * (s[k] - y[k]);
      if (s.size() != y.size()) d = std::numeric_limits<double>::infinity();
      if (d < best) {
        best = d;
        nearest = &s;
      }
    }
    throw ValidationError("y = " + format_vec(y) + " is not in the support; nearest support point is " +
                          format_vec(*nearest));
  }
  std::sort(law.begin(), law.end(),
            [](const ConditionalAtom& l, const ConditionalAtom& r) { return l.z < r.z; });
  std::size_t m = 0;
  for (std::size_t i = 0; i < law.size(); ++i) {
    if (m > 0 && law[m - 1].z == law[i].z) {
      law[m - 1].prob += law[i].prob;
    } else {
      law[m++] = law[i];
    }
  }
  law.resize(m);
  double cumulative = 0.0;
  for (auto& a : law) {
    a.prob /= mass;
    cumulative += a.prob;
    a.upper = cumulative;
  }
  law.back().upper = 1.0;
  return law;
}

Vec transport(const FiniteJoint& joint, const Vec& y, double e) {
  require(e >= 0.0 && e < 1.0, "transport needs e in [0,1)");
  const auto law = conditional_law(joint, y);
  for (const auto& a : law) {
    if (e < a.upper) return a.z;
  }
  return law.back().z;
}

// ---------------------------------------------------------------------------

CdfCheck check_cdf(const Cdf& F, const CdfGrid& grid) {
  require(grid.points >= 2 && grid.hi > grid.lo, "cdf grid needs >= 2 points on lo < hi");
  const double h = (grid.hi - grid.lo) / (grid.points - 1);
  Vec xs(static_cast<std::size_t>(grid.points));
  Vec fs(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xs[i] = grid.lo + h * static_cast<double>(i);
    fs[i] = F(xs[i]);
    require(fs[i] >= 0.0 && fs[i] <= 1.0,
            "cdf value " + format_double(fs[i]) + " outside [0,1] at x = " + format_double(xs[i]));
    require(i == 0 || fs[i] >= fs[i - 1],
            "cdf decreases on (" + format_double(xs[i > 0 ? i - 1 : 0]) + ", " +
                format_double(xs[i]) + "]");
  }
  CdfCheck check;
  for (std::size_t i = 1; i < xs.size() && !check.atom_at; ++i) {
    double a = xs[i - 1];
    double b = xs[i];
    double fa = fs[i - 1];
    double fb = fs[i];
    if (fb - fa < grid.atom_mass) continue;
    while (b - a > grid.atom_width * std::max(1.0, std::abs(a))) {
      const double mid = 0.5 * (a + b);
      const double fm = F(mid);
      require(fm >= fa && fm <= fb, "cdf is not monotone near x = " + format_double(mid));
      if (fm - fa >= fb - fm) {
        b = mid;
        fb = fm;
      } else {
        a = mid;
        fa = fm;
      }
      if (fb - fa < grid.atom_mass) break;
    }
    if (fb - fa >= grid.atom_mass) check.atom_at = b;
  }
  return check;
}

double uniformize(const Cdf& F, double x) {
  const double u = F(x);
  require(u >= 0.0 && u <= 1.0, "cdf value outside [0,1] at x = " + format_double(x));
  return u;
}

Uniformized uniformize(const Cdf& F, std::span<const double> xs, const CdfGrid& grid) {
  const CdfCheck check = check_cdf(F, grid);
  Uniformized r;
  if (check.atom_at) {
    r.atom_warning = true;
    r.warning = "atomless required: F jumps at x = " + format_double(*check.atom_at);
  }
  r.u.reserve(xs.size());
  for (double x : xs) r.u.push_back(uniformize(F, x));
  return r;
}

Uniformized conditional_uniformize(std::span<const double> x, std::span<const double> w,
                                   const ConditionalCdf& H, const ConditionalCdf& left_limit,
                                   std::uint64_t seed) {
  require(x.size() == w.size(), "x and w samples differ in length");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Uniformized r;
  r.u.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = H(x[i], w[i]);
    require(h >= 0.0 && h <= 1.0, "conditional cdf value outside [0,1]");
    if (left_limit) {
      const double hl = left_limit(x[i], w[i]);
      require(hl >= 0.0 && hl <= h, "left limit must lie in [0, H(x|w)]");
      if (hl < h) {
        r.atom_warning = true;
        r.u.push_back(hl + unit(rng) * (h - hl));
        continue;
      }
    }
    r.u.push_back(h);
  }
  if (r.atom_warning) {
    r.warning = "atomless required: conditional law has atoms; randomized rank applied";
  }
  return r;
}

Uniformized conditional_uniformize_empirical(std::span<const double> x,
                                             std::span<const double> w, std::uint64_t seed) {
  require(x.size() == w.size(), "x and w samples differ in length");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec v(x.size());
  for (auto& s : v) s = unit(rng);

  std::map<double, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < w.size(); ++i) groups[w[i]].push_back(i);

  Uniformized r;
  r.u.assign(x.size(), 0.0);
  for (auto& [key, idx] : groups) {
    std::sort(idx.begin(), idx.end(), [&x](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    const double n = static_cast<double>(idx.size());
    for (std::size_t lo = 0; lo < idx.size();) {
      std::size_t hi = lo + 1;
      while (hi < idx.size() && x[idx[hi]] == x[idx[lo]]) ++hi;
      if (hi - lo > 1) r.atom_warning = true;
      for (std::size_t k = lo; k < hi; ++k) {
        const std::size_t i = idx[k];
        r.u[i] = (static_cast<double>(lo) + v[i] * static_cast<double>(hi - lo)) / n;
      }
      lo = hi;
    }
  }
  if (r.atom_warning) {
    r.warning = "atomless required: tied samples within a w group; randomized rank applied";
  }
  return r;
}

// ---------------------------------------------------------------------------

TestStatistic ks_uniform(std::span<const double> u, double alpha) {
  require(!u.empty(), "KS test needs samples");
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
  Vec s(u.begin(), u.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double k = static_cast<double>(i);
    d = std::max({d, (k + 1.0) / n - s[i], s[i] - k / n});
  }
  TestStatistic t;
  t.statistic = d;
  t.critical = std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(n);
  return t;
}

TestStatistic chi_square_independence(std::span<const double> a, std::span<const double> b,
                                      int bins, double alpha) {
  require(a.size() == b.size() && !a.empty(), "chi-square needs paired samples");
  require(bins >= 2, "chi-square needs >= 2 bins");
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
  const auto nb = static_cast<std::size_t>(bins);
  auto bin = [bins](double v) {
    require(v >= 0.0 && v <= 1.0, "chi-square samples must lie in [0,1]");
    return static_cast<std::size_t>(std::min(static_cast<int>(v * bins), bins - 1));
  };
  std::vector<double> table(nb * nb, 0.0);
  std::vector<double> rows(nb, 0.0);
  std::vector<double> cols(nb, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::size_t r = bin(a[i]);
    const std::size_t c = bin(b[i]);
    table[r * nb + c] += 1.0;
    rows[r] += 1.0;
    cols[c] += 1.0;
  }
  const double n = static_cast<double>(a.size());
  double stat = 0.0;
  for (std::size_t r = 0; r < nb; ++r) {
    for (std::size_t c = 0; c < nb; ++c) {
      const double expected = rows[r] * cols[c] / n;
      if (expected > 0.0) {
        const double d = table[r * nb + c] - expected;
        stat += d * d / expected;
      }
    }
  }
  TestStatistic t;
  t.statistic = stat;
  t.dof = (bins - 1) * (bins - 1);
  t.critical = boost::math::quantile(boost::math::chi_squared(t.dof), 1.0 - alpha);
  return t;
}

Vec rank_to_unit(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&values](std::size_t l, std::size_t r) { return values[l] < values[r]; });
  Vec out(values.size());
  const double n = static_cast<double>(values.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    out[order[k]] = (static_cast<double>(k) + 0.5) / n;
  }
  return out;
}

double total_variation(const FiniteJoint& a, const FiniteJoint& b) {
  std::map<std::pair<Vec, Vec>, double> diff;
  for (const auto& x : a.atoms()) diff[{x.y, x.z}] += x.prob;
  for (const auto& x : b.atoms()) diff[{x.y, x.z}] -= x.prob;
  double tv = 0.0;
  for (const auto& [key, d] : diff) tv += std::abs(d);
  return 0.5 * tv;
}

FiniteJoint reconstruct_by_transport(const FiniteJoint& joint) {
  std::vector<JointAtom> atoms;
  for (const auto& y : joint.y_support()) {
    const double delta = joint.y_mass(y);
    double lower = 0.0;
    for (const auto& c : conditional_law(joint, y)) {
      const double e = 0.5 * (lower + c.upper);
      atoms.push_back({y, transport(joint, y, e), delta * (c.upper - lower)});
      lower = c.upper;
    }
  }
  return FiniteJoint(std::move(atoms));
}

// ---------------------------------------------------------------------------

bool SelfTestReport::passed() const {
  return std::all_of(cases.begin(), cases.end(), [](const SelfTestCase& c) { return c.passed; });
}

FiniteJoint random_joint(std::uint64_t seed, int max_atoms) {
  require(max_atoms >= 1, "random joint needs max_atoms >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> count(1, max_atoms);
  std::uniform_int_distribution<int> ydig(0, 2);
  std::uniform_int_distribution<int> zdig(0, 3);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  const int n = count(rng);
  std::vector<JointAtom> atoms;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    JointAtom a;
    a.y = {static_cast<double>(ydig(rng))};
    a.z = {static_cast<double>(zdig(rng)), static_cast<double>(zdig(rng))};
    a.prob = weight(rng);
    total += a.prob;
    atoms.push_back(std::move(a));
  }
  for (auto& a : atoms) a.prob /= total;
  return FiniteJoint(std::move(atoms));
}

SelfTestReport run_self_test(std::uint64_t seed) {
  SelfTestReport report;
  report.seed = seed;
  auto add = [&report](std::string name, const TestStatistic& t) {
    report.cases.push_back({std::move(name), t.statistic, t.critical, t.passed()});
  };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  {
    constexpr std::size_t n = 100'000;
    Vec first(n);
    Vec second(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec parts = split_uniform(unit(rng), 2, 26);
      first[i] = parts[0];
      second[i] = parts[1];
    }
    add("split_uniform independence (chi-square 4x4)", chi_square_independence(first, second, 4));
    add("split_uniform first marginal (KS)", ks_uniform(first));
    add("split_uniform second marginal (KS)", ks_uniform(second));
  }
  {
    constexpr std::size_t n = 10'000;
    std::exponential_distribution<double> expo(1.0);
    Vec xs(n);
    for (auto& x : xs) x = expo(rng);
    const Cdf F = [](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x); };
    add("uniformize exponential (KS)", ks_uniform(uniformize(F, xs).u));
  }
  {
    constexpr std::size_t n = 10'000;
    std::exponential_distribution<double> expo(1.0);
    Vec xs(n);
    Vec ws(n);
    for (std::size_t i = 0; i < n; ++i) {
      ws[i] = unit(rng);
      xs[i] = ws[i] + expo(rng);
    }
    const ConditionalCdf H = [](double x, double w) {
      return x <= w ? 0.0 : -std::expm1(-(x - w));
    };
    const Vec u = conditional_uniformize(xs, ws, H).u;
    add("conditional_uniformize marginal (KS)", ks_uniform(u));
    add("conditional_uniformize independence of W (chi-square 4x4)",
        chi_square_independence(u, rank_to_unit(ws), 4));
  }
  {
    double worst = 0.0;
    for (std::uint64_t k = 0; k < 50; ++k) {
      const FiniteJoint joint = random_joint(seed + k);
      worst = std::max(worst, total_variation(joint, reconstruct_by_transport(joint)));
    }
    report.cases.push_back({"transport reconstruction (max TV, 50 joints)", worst, 1e-12,
                            worst <= 1e-12});
  }
  return report;
}

}  // namespace cptlab
