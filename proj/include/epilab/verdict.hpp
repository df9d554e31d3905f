#pragma once

#include <string_view>

namespace epilab {

/// Outcome of a check. A hypothesis that does not hold is reported apart
/// from a failed conclusion.
enum class Verdict { pass, fail, hypothesis_not_met };

constexpr std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::fail:
      return "fail";
    case Verdict::hypothesis_not_met:
      return "hypothesis-not-met";
  }
  return "fail";
}

}  // namespace epilab
