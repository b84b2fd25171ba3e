#pragma once

#include <stdexcept>
#include <string>

namespace rydopt {

// Error taxonomy mirrors the CLI exit codes: config/usage -> 2,
// numerical failures -> 3, control-constraint violations -> 4.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
  using Error::Error;
};

// Programming/API misuse (basis mismatch, inconsistent dimensions).
struct UsageError : Error {
  using Error::Error;
};

struct NumericalError : Error {
  using Error::Error;
};

struct ConstraintError : Error {
  using Error::Error;
};

}  // namespace rydopt
