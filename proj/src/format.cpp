#include "cptlab/format.hpp"

#include <cstdint>
#include <cstdio>

#include "cptlab/extended.hpp"

namespace cptlab {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string ExtendedReal::to_string() const {
  return infinite_ ? std::string("+inf") : format_double(value_);
}

ExtendedReal minus_finite(const ExtendedReal& lhs, const ExtendedReal& rhs) {
  if (!rhs.is_finite()) throw InternalError("cannot subtract +inf");
  if (!lhs.is_finite()) return lhs;
  return ExtendedReal::finite(lhs.value() - rhs.value());
}

}  // namespace cptlab
