#pragma once

#include <cstdio>
#include <string>

namespace pimdc {

// CSV/label float formatting: six significant digits.
inline std::string format_g6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace pimdc
