#pragma once

#include <stdexcept>
#include <string>

namespace magnus {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input (bad dims, out-of-domain t, parse failures).
class InputError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public InputError {
 public:
  using InputError::InputError;
};

class DomainError : public InputError {
 public:
  using InputError::InputError;
};

class ParseError : public InputError {
 public:
  using InputError::InputError;
};

/// Numerical failure: the computation itself could not be completed.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A polynomial entry grew past the configured degree guard.
class DegreeOverflow : public NumericError {
 public:
  using NumericError::NumericError;
};

/// An eigenvalue lies on the closed negative real axis, so the principal
/// logarithm (and the resolvent-integral formula) does not apply.
class NegativeSpectrum : public NumericError {
 public:
  using NumericError::NumericError;
};

class IllConditioned : public NumericError {
 public:
  using NumericError::NumericError;
};

class NoConvergence : public NumericError {
 public:
  using NumericError::NumericError;
};

class StepUnderflow : public NumericError {
 public:
  using NumericError::NumericError;
};

class SingularMatrix : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace magnus
