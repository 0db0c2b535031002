#pragma once

#include <stdexcept>
#include <string>

namespace fovholo {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad data passed to an operation (shape mismatch, non-finite values, ...).
struct InvalidInput : Error {
  using Error::Error;
};

/// Parameter set violates a type invariant (zero pitch, steps < 1, ...).
struct InvalidConfig : Error {
  using Error::Error;
};

/// Corrupt or inconsistent file contents.
struct FormatError : Error {
  using Error::Error;
};

/// Optimization produced a non-finite loss or gradient.
struct Diverged : Error {
  int iteration;
  Diverged(const std::string& msg, int it) : Error(msg), iteration(it) {}
};

}  // namespace fovholo
