#include "cptlab/preferences.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include "cptlab/format.hpp"

namespace cptlab {

std::string to_string(UtilityFamily f) {
  return f == UtilityFamily::power ? "power" : "custom";
}

std::string to_string(DistortionFamily f) {
  switch (f) {
    case DistortionFamily::identity:
      return "identity";
    case DistortionFamily::power:
      return "power";
    case DistortionFamily::tk:
      return "tk";
    case DistortionFamily::custom:
      return "custom";
  }
  return "custom";
}

// ---------------------------------------------------------------------------

Utility Utility::power(double exponent, double scale) {
  require(exponent > 0.0 && exponent <= 1.0, "utility exponent must lie in (0,1]");
  require(scale > 0.0, "utility scale must be > 0");
  Utility u;
  u.family_ = UtilityFamily::power;
  u.exponent_ = exponent;
  u.scale_ = scale;
  u.name_ = "power";
  return u;
}

Utility Utility::custom(std::function<double(double)> fn, std::string name) {
  require(static_cast<bool>(fn), "custom utility needs a function");
  Utility u;
  u.family_ = UtilityFamily::custom;
  u.fn_ = std::move(fn);
  u.name_ = std::move(name);
  return u;
}

double Utility::operator()(double x) const {
  if (family_ == UtilityFamily::custom) return fn_(x);
  if (x == 0.0) return 0.0;
  return exponent_ == 1.0 ? scale_ * x : scale_ * std::pow(x, exponent_);
}

Distortion Distortion::identity() {
  Distortion w;
  w.family_ = DistortionFamily::identity;
  w.name_ = "identity";
  return w;
}

Distortion Distortion::power(double gamma) {
  require(gamma > 0.0 && gamma <= 1.0, "distortion exponent must lie in (0,1]");
  Distortion w;
  w.family_ = DistortionFamily::power;
  w.gamma_ = gamma;
  w.name_ = "power";
  return w;
}

Distortion Distortion::tk(double gamma) {
  require(gamma > 0.0 && gamma <= 1.0, "distortion exponent must lie in (0,1]");
  Distortion w;
  w.family_ = DistortionFamily::tk;
  w.gamma_ = gamma;
  w.name_ = "tk";
  return w;
}

Distortion Distortion::custom(std::function<double(double)> fn, std::string name) {
  require(static_cast<bool>(fn), "custom distortion needs a function");
  Distortion w;
  w.family_ = DistortionFamily::custom;
  w.fn_ = std::move(fn);
  w.name_ = std::move(name);
  return w;
}

double tk_distortion(double gamma, double p) {
  require(gamma > 0.0 && gamma <= 1.0, "TK exponent must lie in (0,1]");
  require(p >= 0.0 && p <= 1.0, "probability must lie in [0,1]");
  if (p == 0.0 || p == 1.0 || gamma == 1.0) return p;
  const double a = std::pow(p, gamma);
  const double b = std::pow(1.0 - p, gamma);
  return a / std::pow(a + b, 1.0 / gamma);
}

double Distortion::operator()(double p) const {
  switch (family_) {
    case DistortionFamily::identity:
      return p;
    case DistortionFamily::power:
      if (p == 0.0 || p == 1.0) return p;
      return gamma_ == 0.5 ? std::sqrt(p) : std::pow(p, gamma_);
    case DistortionFamily::tk:
      return tk_distortion(gamma_, p);
    case DistortionFamily::custom:
      return fn_(p);
  }
  return p;
}

// ---------------------------------------------------------------------------

namespace {

double tk_loss_floor(double gamma) {
  const Distortion w = Distortion::tk(gamma);
  double lo = 1.0;
  for (int i = 1; i <= 100000; ++i) {
    const double p = i / 100000.0;
    lo = std::min(lo, w(p) / p);
  }
  return 0.99 * lo;
}

double loss_floor(const Distortion& w) {
  return w.family() == DistortionFamily::tk ? tk_loss_floor(w.gamma()) : 1.0;
}

}  // namespace

PreferenceSpec PreferenceSpec::power_family(double alpha_plus, double alpha_minus,
                                            double loss_scale, Distortion w_plus,
                                            Distortion w_minus) {
  PreferenceSpec p;
  p.utility.gain = Utility::power(alpha_plus);
  p.utility.loss = Utility::power(alpha_minus, loss_scale);
  p.utility.alpha_plus = alpha_plus;
  p.utility.alpha_minus = alpha_minus;
  p.utility.k_plus = 1.0;
  p.utility.k_minus = loss_scale;
  p.distortion.gamma_plus = w_plus.family() == DistortionFamily::identity ? 1.0 : w_plus.gamma();
  p.distortion.gamma_minus = w_minus.family() == DistortionFamily::identity ? 1.0 : w_minus.gamma();
  p.distortion.g_plus = 1.0;
  p.distortion.g_minus = loss_floor(w_minus);
  p.distortion.gain = std::move(w_plus);
  p.distortion.loss = std::move(w_minus);
  return p;
}

PreferenceSpec PreferenceSpec::tversky_kahneman() {
  return power_family(0.88, 0.88, 2.25, Distortion::tk(0.61), Distortion::tk(0.69));
}

PreferenceSpec PreferenceSpec::root_gain_linear_loss() {
  return power_family(0.25, 1.0, 1.0, Distortion::power(0.5), Distortion::identity());
}

double PreferenceSpec::loss_scale() const {
  return utility.loss.family() == UtilityFamily::power ? utility.loss.scale() : 1.0;
}

void validate(const PreferenceSpec& pref) {
  const auto& u = pref.utility;
  const auto& w = pref.distortion;
  auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
  require(in_unit(u.alpha_plus) && in_unit(u.alpha_minus), "alpha+- must lie in (0,1]");
  require(in_unit(w.gamma_plus) && in_unit(w.gamma_minus), "gamma+- must lie in (0,1]");
  require(u.k_plus > 0.0 && u.k_minus > 0.0, "k+- must be > 0");
  require(w.g_plus > 0.0 && w.g_minus > 0.0, "g+- must be > 0");
  require(u.gain(0.0) == 0.0 && u.loss(0.0) == 0.0, "utilities must vanish at 0");
  require(w.gain(0.0) == 0.0 && w.loss(0.0) == 0.0, "distortions must vanish at 0");
  require(w.gain(1.0) == 1.0 && w.loss(1.0) == 1.0, "distortions must equal 1 at 1");

  constexpr double slack = 1e-12;
  for (int i = 0; i <= 240; ++i) {
    const double x = std::pow(10.0, -6.0 + 12.0 * i / 240.0);
    const double up = u.gain(x);
    const double um = u.loss(x);
    require(up >= 0.0 && um >= 0.0, "utilities must be nonnegative");
    require(up <= u.k_plus * (std::pow(x, u.alpha_plus) + 1.0) * (1.0 + slack),
            "u+ violates its envelope at x = " + format_double(x));
    require(u.k_minus * (std::pow(x, u.alpha_minus) - 1.0) <= um * (1.0 + slack) + slack,
            "u- violates its envelope at x = " + format_double(x));
  }
  const bool builtin_plus = w.gain.family() != DistortionFamily::custom;
  const bool builtin_minus = w.loss.family() != DistortionFamily::custom;
  double prev_plus = 0.0;
  double prev_minus = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double p = i / 1000.0;
    const double wp = w.gain(p);
    const double wm = w.loss(p);
    require(wp >= 0.0 && wp <= 1.0 && wm >= 0.0 && wm <= 1.0, "distortions must map into [0,1]");
    require(wp <= w.g_plus * std::pow(p, w.gamma_plus) * (1.0 + slack) + slack,
            "w+ violates its envelope at p = " + format_double(p));
    require(wm >= w.g_minus * p * (1.0 - slack) - slack,
            "w- violates its envelope at p = " + format_double(p));
    if (builtin_plus) require(wp >= prev_plus, "w+ is not monotone");
    if (builtin_minus) require(wm >= prev_minus, "w- is not monotone");
    prev_plus = wp;
    prev_minus = wm;
  }
}

ParamReport check_conditions(const PreferenceSpec& pref) {
  const double ap = pref.utility.alpha_plus;
  const double am = pref.utility.alpha_minus;
  const double gp = pref.distortion.gamma_plus;
  const double gm = pref.distortion.gamma_minus;
  ParamReport r;
  r.condition_a = ap / gp < am;
  r.condition_bulb = ap < am && ap / gp <= am / gm;
  const double lo = 1.0 / gp;
  const double hi = am / ap;
  if (lo < hi) {
    r.lambda_interval = LambdaInterval{lo, hi};
    if (pref.lambda && *pref.lambda > lo && *pref.lambda < hi) {
      r.lambda = *pref.lambda;
    } else {
      r.lambda = 0.5 * (lo + hi);
    }
  }
  if (pref.distortion.gain.family() == DistortionFamily::tk &&
      pref.distortion.loss.family() == DistortionFamily::tk) {
    r.tk_pathology_p = tk_pathology_threshold(pref.loss_scale(), pref.distortion.gain.gamma(),
                                              pref.distortion.loss.gamma());
  }
  return r;
}

double resolve_lambda(const PreferenceSpec& pref) {
  const ParamReport r = check_conditions(pref);
  require(r.condition_a, "condition (a) a+/c+ < a- fails; no auxiliary exponent exists");
  if (pref.lambda) {
    require(*pref.lambda > r.lambda_interval->lo && *pref.lambda < r.lambda_interval->hi,
            "lambda override must satisfy lambda c+ > 1 and lambda a+ < a-");
  }
  return *r.lambda;
}

std::optional<double> pathology_threshold(const Distortion& w_plus, const Distortion& w_minus,
                                          double k) {
  require(k > 0.0, "loss scale k must be > 0");
  auto h = [&](double p) { return w_plus(p) - k * w_minus(1.0 - p); };
  double lo = 0.0;
  double hi = 1.0;
  double hlo = h(lo);
  const double hhi = h(hi);
  if (hlo == 0.0) return lo;
  if (hhi == 0.0) return hi;
  if ((hlo > 0.0) == (hhi > 0.0)) return std::nullopt;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    const double hm = h(mid);
    if (hm == 0.0) return mid;
    if ((hm > 0.0) == (hlo > 0.0)) {
      lo = mid;
      hlo = hm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::optional<double> tk_pathology_threshold(double k, double gamma_plus, double gamma_minus) {
  return pathology_threshold(Distortion::tk(gamma_plus), Distortion::tk(gamma_minus), k);
}

// ---------------------------------------------------------------------------

std::map<std::string, std::string> read_key_values(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, "line " + std::to_string(line_no) + ": expected key=value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

namespace {

double number_value(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("preference key '" + key + "' needs a number, got '" + text + "'");
  }
}

Distortion make_distortion(const std::string& family, double gamma) {
  if (family == "identity") return Distortion::identity();
  if (family == "power") return Distortion::power(gamma);
  if (family == "tk") return Distortion::tk(gamma);
  throw ValidationError("unknown distortion family '" + family + "' (identity|power|tk)");
}

}  // namespace

PreferenceSpec preferences_from_map(const std::map<std::string, std::string>& kv) {
  static const std::set<std::string> known = {
      "alpha_plus", "alpha_minus", "k",       "family_wplus", "family_wminus", "gamma_plus",
      "gamma_minus", "k_plus",     "k_minus", "g_plus",       "g_minus",       "lambda",
      "family_uplus", "family_uminus"};
  for (const auto& [key, value] : kv) {
    require(known.contains(key), "unknown preference key '" + key + "'");
  }
  auto get = [&](const std::string& key, double fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : number_value(key, it->second);
  };
  auto get_text = [&](const std::string& key, const std::string& fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
  };
  for (const char* key : {"family_uplus", "family_uminus"}) {
    require(get_text(key, "power") == "power", std::string(key) + " supports only 'power'");
  }

  const double gamma_plus = get("gamma_plus", 0.5);
  const double gamma_minus = get("gamma_minus", 1.0);
  PreferenceSpec p = PreferenceSpec::power_family(
      get("alpha_plus", 0.25), get("alpha_minus", 1.0), get("k", 1.0),
      make_distortion(get_text("family_wplus", "power"), gamma_plus),
      make_distortion(get_text("family_wminus", "identity"), gamma_minus));
  p.utility.k_plus = get("k_plus", p.utility.k_plus);
  p.utility.k_minus = get("k_minus", p.utility.k_minus);
  p.distortion.g_plus = get("g_plus", p.distortion.g_plus);
  p.distortion.g_minus = get("g_minus", p.distortion.g_minus);
  if (kv.contains("lambda")) p.lambda = get("lambda", 0.0);
  validate(p);
  return p;
}

PreferenceSpec parse_preferences(std::istream& in) { return preferences_from_map(read_key_values(in)); }

void write_preferences(std::ostream& out, const PreferenceSpec& pref) {
  require(pref.utility.gain.family() == UtilityFamily::power &&
              pref.utility.loss.family() == UtilityFamily::power &&
              pref.distortion.gain.family() != DistortionFamily::custom &&
              pref.distortion.loss.family() != DistortionFamily::custom,
          "only built-in families can be written as key=value");
  out << "alpha_plus=" << format_double(pref.utility.alpha_plus) << '\n'
      << "alpha_minus=" << format_double(pref.utility.alpha_minus) << '\n'
      << "k=" << format_double(pref.loss_scale()) << '\n'
      << "family_wplus=" << to_string(pref.distortion.gain.family()) << '\n'
      << "gamma_plus=" << format_double(pref.distortion.gamma_plus) << '\n'
      << "family_wminus=" << to_string(pref.distortion.loss.family()) << '\n'
      << "gamma_minus=" << format_double(pref.distortion.gamma_minus) << '\n'
      << "k_plus=" << format_double(pref.utility.k_plus) << '\n'
      << "k_minus=" << format_double(pref.utility.k_minus) << '\n'
      << "g_plus=" << format_double(pref.distortion.g_plus) << '\n'
      << "g_minus=" << format_double(pref.distortion.g_minus) << '\n';
  if (pref.lambda) out << "lambda=" << format_double(*pref.lambda) << '\n';
}

}  // namespace cptlab
