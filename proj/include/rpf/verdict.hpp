#pragma once

namespace rpf {

/// Outcome of a check. `inapplicable` means a precondition did not hold, which
/// is not a failure of the property being tested.
enum class Verdict { pass, fail, inapplicable };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    default: return "inapplicable";
  }
}

}  // namespace rpf
