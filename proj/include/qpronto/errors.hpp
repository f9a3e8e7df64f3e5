#pragma once

#include <stdexcept>
#include <string>

namespace qpronto {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed user input: bad dimensions, non-Hermitian matrices, bad file fields.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A forward or backward integration produced inf/NaN.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// The optimizer Riccati sweep could not be completed with the given weights.
class RiccatiFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace qpronto
