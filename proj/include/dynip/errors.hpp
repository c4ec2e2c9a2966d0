#pragma once

#include <stdexcept>
#include <string>

namespace dynip {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values, inconsistent arguments, malformed files.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Grids or vector sizes that do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Out-of-range scalar parameters (widths, regularization parameters, ...).
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Arguments outside the domain of definition, e.g. shifts beyond the horizon.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Operation not available for this geometry or composition kind.
class Unsupported : public Error {
 public:
  using Error::Error;
};

/// A dense assembly would exceed the size guard.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// An iteration blew up.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Unknown or out-of-range configuration entries; the message names the key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace dynip
