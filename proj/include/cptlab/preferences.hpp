#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "cptlab/error.hpp"

namespace cptlab {

enum class UtilityFamily { power, custom };
enum class DistortionFamily { identity, power, tk, custom };

std::string to_string(UtilityFamily f);
std::string to_string(DistortionFamily f);

/// u: R+ -> R+, u(0) = 0. The power family is `scale * x^exponent`.
class Utility {
 public:
  static Utility power(double exponent, double scale = 1.0);
  static Utility custom(std::function<double(double)> fn, std::string name);

  [[nodiscard]] double operator()(double x) const;
  [[nodiscard]] UtilityFamily family() const { return family_; }
  [[nodiscard]] double exponent() const { return exponent_; }
  [[nodiscard]] double scale() const { return scale_; }
  [[nodiscard]] const std::string& name() const { return name_; }

 private:
  UtilityFamily family_ = UtilityFamily::power;
  double exponent_ = 1.0;
  double scale_ = 1.0;
  std::function<double(double)> fn_;
  std::string name_;
};

/// w: [0,1] -> [0,1], w(0) = 0, w(1) = 1.
class Distortion {
 public:
  static Distortion identity();
  static Distortion power(double gamma);
  /// p^g / (p^g + (1-p)^g)^{1/g}
  static Distortion tk(double gamma);
  static Distortion custom(std::function<double(double)> fn, std::string name);

  [[nodiscard]] double operator()(double p) const;
  [[nodiscard]] DistortionFamily family() const { return family_; }
  [[nodiscard]] double gamma() const { return gamma_; }
  [[nodiscard]] const std::string& name() const { return name_; }

 private:
  DistortionFamily family_ = DistortionFamily::identity;
  double gamma_ = 1.0;
  std::function<double(double)> fn_;
  std::string name_;
};

/// Tversky-Kahneman weighting; rejects gamma outside (0,1] or p outside [0,1].
double tk_distortion(double gamma, double p);

/// Gains/losses utilities with their growth envelopes
///   u+(x) <= k+ (x^a+ + 1),   k- (x^a- - 1) <= u-(x).
struct UtilityPair {
  Utility gain = Utility::power(1.0);
  Utility loss = Utility::power(1.0);
  double k_plus = 1.0;
  double k_minus = 1.0;
  double alpha_plus = 1.0;
  double alpha_minus = 1.0;
};

/// Distortions with envelopes  w+(p) <= g+ p^c+  and  w-(p) >= g- p.
struct DistortionPair {
  Distortion gain = Distortion::identity();
  Distortion loss = Distortion::identity();
  double g_plus = 1.0;
  double g_minus = 1.0;
  double gamma_plus = 1.0;
  double gamma_minus = 1.0;
};

struct PreferenceSpec {
  UtilityPair utility;
  DistortionPair distortion;
  /// Auxiliary exponent; when empty the midpoint of the feasible interval.
  std::optional<double> lambda;

  /// Power utilities u+ = x^a+, u- = k x^a- with envelope constants read
  /// off the families (g- for TK is the grid minimum of w(p)/p, shaded 1%).
  static PreferenceSpec power_family(double alpha_plus, double alpha_minus, double loss_scale,
                                     Distortion w_plus, Distortion w_minus);
  /// a+- = 0.88, k = 2.25, TK weights with c+ = 0.61, c- = 0.69.
  static PreferenceSpec tversky_kahneman();
  /// u+ = x^{1/4}, u- = x, w+ = sqrt(p), w- = p: the coin-gamble model where
  /// external randomization strictly pays.
  static PreferenceSpec root_gain_linear_loss();

  /// Loss-aversion multiplier of a power-family u- (1 for custom).
  [[nodiscard]] double loss_scale() const;
};

/// Throws ValidationError unless exponents lie in (0,1], constants are
/// positive, u(0) = w(0) = 0, w(1) = 1, and every envelope holds on a
/// log-spaced grid x in [1e-6, 1e6] and a 1001-point p grid.
void validate(const PreferenceSpec& pref);

struct LambdaInterval {
  double lo;
  double hi;
};

struct ParamReport {
  bool condition_a = false;     // a+/c+ < a-
  bool condition_bulb = false;  // a+ < a- and a+/c+ <= a-/c-
  std::optional<LambdaInterval> lambda_interval;  // (1/c+, a-/a+)
  std::optional<double> lambda;                    // chosen (override or midpoint)
  std::optional<double> tk_pathology_p;            // both distortions TK
};

ParamReport check_conditions(const PreferenceSpec& pref);

/// The lambda actually used: the override if valid, else the midpoint.
/// Throws when condition (a) fails or the override leaves the interval.
double resolve_lambda(const PreferenceSpec& pref);

/// Root p* of w+(p) = k w-(1-p) for TK weights, by bisection to 1e-10.
/// Empty when there is no sign change on (0,1).
std::optional<double> tk_pathology_threshold(double k, double gamma_plus, double gamma_minus);

/// Same root for arbitrary continuous distortions.
std::optional<double> pathology_threshold(const Distortion& w_plus, const Distortion& w_minus,
                                          double k);

// ---------------------------------------------------------------------------
// key=value preference files

/// Keys: alpha_plus, alpha_minus, k (loss scale), family_wplus, family_wminus
/// (identity|power|tk), gamma_plus, gamma_minus, and optional overrides
/// k_plus, k_minus, g_plus, g_minus, lambda. Unset keys default to the
/// root-gain/linear-loss model.
PreferenceSpec parse_preferences(std::istream& in);
PreferenceSpec preferences_from_map(const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> read_key_values(std::istream& in);
void write_preferences(std::ostream& out, const PreferenceSpec& pref);

}  // namespace cptlab
