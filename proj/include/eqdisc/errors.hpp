#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eqdisc {

// Invalid user-supplied configuration or malformed input data/files.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Linear-algebra or sampling failure (non-positive-definite system,
// non-positive inverse-gamma scale, ...).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// State blow-up during integration; carries the first non-finite sample.
struct IntegrationDivergence : NumericalError {
  explicit IntegrationDivergence(std::size_t index)
      : NumericalError("integration diverged: non-finite state at sample " +
                       std::to_string(index)),
        first_bad_index(index) {}
  std::size_t first_bad_index;
};

// Multi-chain run failed the convergence gate.
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace eqdisc
