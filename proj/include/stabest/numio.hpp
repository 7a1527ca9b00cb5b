#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <system_error>

#include "stabest/error.hpp"

// Locale-independent number formatting. format_double emits the shortest
// string that parses back to the identical bit pattern, which is what makes
// CSV round trips exact and repeated runs byte-identical.

namespace stabest {

inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw DataError("not a number: '" + std::string(s) + "'");
  }
  return v;
}

inline long long parse_int(std::string_view s) {
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw DataError("not an integer: '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace stabest
