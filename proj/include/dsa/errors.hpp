#pragma once

#include <stdexcept>
#include <string>

namespace dsa {

// Base for every error the library reports. The C API maps subclasses onto
// status codes, so keep the hierarchy flat.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Out-of-range numeric parameter (temperature, probability, factor...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Malformed input: bad solution, bad instance file, bad config.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Operation invoked on an object in the wrong lifecycle state.
class StateError : public Error {
 public:
  using Error::Error;
};

// Failure while running: degenerate landscape, empty reduce, I/O.
class RuntimeFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace dsa
