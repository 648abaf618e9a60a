#pragma once

#include <string>

namespace cptlab {

/// Shortest text that round-trips through strtod for every output path:
/// 17 significant digits, `%.17g`.
std::string format_double(double v);

/// 64-bit FNV-1a, printed as 16 hex digits. Used for run-manifest checksums.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace cptlab
