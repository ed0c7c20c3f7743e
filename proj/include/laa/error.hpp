#pragma once

#include <stdexcept>
#include <string>

namespace laa {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file (case, profile, series, config).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that violates a model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine could not produce a trustworthy answer.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace laa
