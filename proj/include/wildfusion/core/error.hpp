#pragma once

#include <stdexcept>
#include <string>

namespace wf {

/// Base for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Caller passed invalid arguments or data that violates a precondition.
struct InputError : Error {
  using Error::Error;
};

/// Configuration file is malformed or a value is out of domain.
struct ConfigError : Error {
  using Error::Error;
};

/// A persisted artifact is corrupt or has an unexpected layout.
struct FormatError : Error {
  using Error::Error;
};

/// Numerical failure (divergence, NaN loss).
struct NumericError : Error {
  using Error::Error;
};

}  // namespace wf
