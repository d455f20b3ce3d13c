#pragma once

#include <stdexcept>
#include <string>

namespace dkc {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

/// An exponential oracle was asked for an instance above its budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

/// A point would break the configured (d_min, d_max) distance bounds.
class BoundsViolation : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

}  // namespace dkc
