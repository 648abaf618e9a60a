#pragma once

#include <stdexcept>
#include <string>

namespace cptlab {

/// Raised when caller-supplied data violates a documented precondition.
/// The CLI maps it to exit status 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A broken internal invariant (exit status 1 in the CLI).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace cptlab
