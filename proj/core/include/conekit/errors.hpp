#pragma once

#include <stdexcept>

namespace conekit {

struct IndexError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// Point outside the set an operation requires it to belong to.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operation not available in closed form for the given input.
struct Unsupported : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A theorem hypothesis was checked and failed (or could not be verified).
struct HypothesisViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace conekit
