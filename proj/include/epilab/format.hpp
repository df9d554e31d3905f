#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

#include "epilab/error.hpp"

namespace epilab {

/// Shortest round-trip decimal form of a finite double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Parses a whole token as a double; "+inf", "inf" and "-inf" are accepted.
inline double parse_double(const std::string& token, const char* what) {
  if (token == "+inf" || token == "inf") return HUGE_VAL;
  if (token == "-inf") return -HUGE_VAL;
  double v = 0.0;
  const char* first = token.data();
  const char* last = first + token.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || token.empty()) {
    throw config_error(std::string(what) + ": not a number: '" + token + "'");
  }
  return v;
}

}  // namespace epilab
