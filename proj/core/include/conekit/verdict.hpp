#pragma once

#include <optional>
#include <string>
#include <vector>

#include "conekit/rational.hpp"

namespace conekit {

// Three-valued outcome of a decision or semi-decision, plus "not applicable"
// for sufficient-condition checkers whose structural premise is absent.
enum class Holds { Yes, No, Inconclusive, NotApplicable };

inline const char* to_string(Holds h) {
  switch (h) {
    case Holds::Yes:
      return "yes";
    case Holds::No:
      return "no";
    case Holds::Inconclusive:
      return "inconclusive-at-K";
    case Holds::NotApplicable:
      return "not-applicable";
  }
  return "?";
}

struct ChipVerdict {
  Holds holds = Holds::Inconclusive;
  Holds at_truncation = Holds::Inconclusive;  // verdict for the first K members alone
  long K_used = 0;
  std::optional<Vec> witness;  // in the tangent intersection, outside T(x; intersection)
  std::string method;
  bool exact = true;
  std::string note;
};

struct QCVerdict {
  std::string condition;
  Holds holds = Holds::Inconclusive;
  long K_used = 0;
  // Failure data: a limit direction outside the hull (closedness) or the
  // vanishing combination x*_i (qualification).
  std::optional<Vec> witness;
  std::vector<Vec> combination;
  std::optional<Vec> certificate_point;  // separating primal point, when used
  std::string method;
  bool exact = true;
  std::string note;
};

}  // namespace conekit
