#pragma once

#include <stdexcept>
#include <string>

namespace plab {

// Base class for every recoverable failure raised by the library.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad argument or violated precondition.
struct InvalidArgument : Error {
  using Error::Error;
};

// exp(t) requested past the saturation guard (t > 700); never returned as inf.
struct SaturationError : Error {
  using Error::Error;
};

// An iterative method stopped without reaching its tolerance.
struct NoConvergence : Error {
  using Error::Error;
};

// File access or format problems.
struct IoError : Error {
  using Error::Error;
};

}  // namespace plab
