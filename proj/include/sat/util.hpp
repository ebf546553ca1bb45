#pragma once

#include <charconv>
#include <string>

#include "sat/common.hpp"

namespace sat {

/// Shortest decimal form that round-trips to the same double. Keeps CSV and
/// JSON output stable across runs and platforms.
inline std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  SAT_CHECK_INTERNAL(res.ec == std::errc{}, "format_double: to_chars failed");
  return std::string(buf, res.ptr);
}

}  // namespace sat
