#pragma once

#include <stdexcept>
#include <string>

namespace balance {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file or serialized payload.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Invalid user configuration (batch larger than pool, unknown algorithm, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Exact enumeration refused because the configuration count exceeds the cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

}  // namespace balance
