#pragma once

#include <cmath>
#include <string>

#include <fmt/format.h>

namespace gridgame {

/// Nine significant digits; infinities as `inf` / `-inf`.
inline std::string format_real(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return fmt::format("{:.9g}", value);
}

}  // namespace gridgame
