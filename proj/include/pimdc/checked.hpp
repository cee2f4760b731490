#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pimdc {

// Counter arithmetic must fail loudly instead of wrapping.
inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b,
                                 const char* what) {
  std::uint64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw std::overflow_error(std::string("count overflow in ") + what);
  }
  return out;
}

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b,
                                 const char* what) {
  std::uint64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) {
    throw std::overflow_error(std::string("count overflow in ") + what);
  }
  return out;
}

inline std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) {
  return (a + b - 1) / b;
}

}  // namespace pimdc
