#pragma once

#include <stdexcept>
#include <string>

namespace mms {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: malformed spaces, violated preconditions, bad configs.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A brute-force or enumeration routine was asked to exceed its bound.
class SizeLimitExceeded : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptySupport : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptySet : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidPairing : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NotTransient : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidDistribution : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class GridMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InsufficientSteps : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class HorizonTooShort : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace mms
