#pragma once

#include <stdexcept>
#include <string>

namespace lambda_asg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input rejected by a precondition (bad measure, bad parameter, bad config).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine could not deliver a result meeting its contract.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class InvalidMeasure : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class OrderViolation : public ValidationError {
 public:
  OrderViolation(const std::string& what, double witness)
      : ValidationError(what), witness_(witness) {}
  double witness() const noexcept { return witness_; }

 private:
  double witness_;
};

class ZeroMass : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SizeLimit : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InfiniteMass : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SingularSystem : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class StateCapReached : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateSelection : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NearSingular : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NotConverged : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace lambda_asg
