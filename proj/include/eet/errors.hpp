#pragma once

#include <stdexcept>
#include <string>

namespace eet {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: bad indices, malformed specs, dimension mismatches, bad config.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed or produced a state outside its invariants.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class StepSizeUnderflow : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class InvariantViolation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The dark subspace spans more than one eigenvalue block, so the
/// closed-form residual-population predictor does not apply.
class DarkBlockNotDegenerate : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace eet
