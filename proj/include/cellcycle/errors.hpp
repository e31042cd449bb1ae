#pragma once

#include <stdexcept>
#include <string>

namespace cellcycle {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised for malformed input (config, CSV tables, invariant violations of rules).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

class DomainExit : public Error {
 public:
  using Error::Error;
};

class NonPositiveG : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class SeedMismatch : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class OutOfWindow : public Error {
 public:
  using Error::Error;
};

class SurvivalZero : public Error {
 public:
  using Error::Error;
};

class BadAge : public Error {
 public:
  using Error::Error;
};

class AssumptionViolation : public Error {
 public:
  using Error::Error;
};

class BracketFailure : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class WeightDivergence : public Error {
 public:
  using Error::Error;
};

class NegativeInput : public Error {
 public:
  using Error::Error;
};

class StepUnderflow : public Error {
 public:
  using Error::Error;
};

class ShortTrajectory : public Error {
 public:
  using Error::Error;
};

class NotHomogeneous : public Error {
 public:
  using Error::Error;
};

}  // namespace cellcycle
