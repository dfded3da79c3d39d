#pragma once

#include <stdexcept>
#include <string>

namespace patrol {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Input is well-formed but violates a domain rule (metric, weights, labels).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// An exact oracle was asked to run beyond its hard size limits.
class LimitError : public Error {
 public:
  using Error::Error;
};

}  // namespace patrol
