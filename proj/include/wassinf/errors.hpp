#pragma once

#include <stdexcept>
#include <string>

namespace wassinf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (p < 1, alpha <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Required configuration is missing, e.g. a cost requested from a space without coordinates.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Inputs are individually valid but inconsistent with each other (dimension or label mismatch).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Malformed file content.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A linear program could not be solved to the requested tolerance.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace wassinf
