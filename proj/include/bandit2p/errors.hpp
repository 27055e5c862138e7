#pragma once

#include <stdexcept>
#include <string>

namespace bandit2p {

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A query point left the feasible set. Signals an alpha/xi misconfiguration,
// never a numerical hiccup to be clamped away.
struct FeasibilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedLossError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bandit2p
