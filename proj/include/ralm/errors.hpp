#pragma once

#include <stdexcept>

namespace ralm {

// File or format problem (bad magic, truncated payload, schema violation).
// CLI maps this to exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure (divergence, non-finite gradients). CLI exit code 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ralm
