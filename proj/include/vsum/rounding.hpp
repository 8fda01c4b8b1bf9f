#pragma once

#include <cmath>
#include <cstddef>

namespace vsum {

// Ratios such as 0.15 are not representable, so products like 0.15 * 20
// land a few ulps off an integer. Snap within this slack before floor/ceil.
inline constexpr double kIntegerSlack = 1e-9;

inline std::size_t floor_count(double v) {
  const double f = std::floor(v + kIntegerSlack);
  return f <= 0.0 ? 0 : static_cast<std::size_t>(f);
}

inline std::size_t ceil_count(double v) {
  const double c = std::ceil(v - kIntegerSlack);
  return c <= 0.0 ? 0 : static_cast<std::size_t>(c);
}

}  // namespace vsum
