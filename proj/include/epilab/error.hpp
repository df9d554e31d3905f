#pragma once

#include <stdexcept>
#include <string>

namespace epilab {

/// Thrown when an operation is called outside its contract (mismatched
/// grids, sub-resolution tolerances, malformed arguments).
class usage_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown for unusable experiment configurations: unknown scenario or tester
/// ids, malformed config files, screens that reject every candidate radius.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace epilab
