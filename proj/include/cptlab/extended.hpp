#pragma once

#include <string>

#include "cptlab/error.hpp"

namespace cptlab {

/// A value in [-inf, +inf) extended by a tagged +infinity.
///
/// Infinity is never represented by a floating-point inf: arithmetic that
/// would need it must go through the named helpers, which reject every
/// combination other than "finite - finite" and "+inf - finite".
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;

  static constexpr ExtendedReal finite(double v) { return ExtendedReal(v, false); }
  static constexpr ExtendedReal plus_infinity() { return ExtendedReal(0.0, true); }

  [[nodiscard]] constexpr bool is_finite() const { return !infinite_; }
  [[nodiscard]] constexpr bool is_plus_infinity() const { return infinite_; }

  /// Throws InternalError when called on +inf.
  [[nodiscard]] double value() const {
    if (infinite_) throw InternalError("ExtendedReal::value() called on +inf");
    return value_;
  }

  [[nodiscard]] std::string to_string() const;

  friend constexpr bool operator==(const ExtendedReal&, const ExtendedReal&) = default;

 private:
  constexpr ExtendedReal(double v, bool inf) : value_(v), infinite_(inf) {}

  double value_ = 0.0;
  bool infinite_ = false;
};

/// `lhs - rhs` for a finite subtrahend. +inf - finite stays +inf.
ExtendedReal minus_finite(const ExtendedReal& lhs, const ExtendedReal& rhs);

}  // namespace cptlab
