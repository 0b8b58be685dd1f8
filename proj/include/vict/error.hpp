#pragma once

#include <stdexcept>
#include <string>

namespace vict {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// NaN or Inf produced or consumed where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed argument value (out-of-range severity, bad config, ...).
class ValueError : public Error {
 public:
  using Error::Error;
};

/// Malformed or truncated file.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace vict
