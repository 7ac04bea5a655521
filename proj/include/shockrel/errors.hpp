#pragma once

#include <stdexcept>
#include <string>

namespace shockrel {

// Argument outside the support of an operation (negative time, negative damage).
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

// Parameters that fail a model or distribution invariant.
class InvalidParameter : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Requested evaluation has no closed form for this family (e.g. Weibull k-fold convolutions).
class Unsupported : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Base for failures of a numerical procedure, as opposed to bad input.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class NonConverged : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

class IllConditioned : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

// Partial fractions are undefined when both poles coincide; the caller merges the
// two Erlang factors into one instead.
class EqualRates : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Raised by the simulator when a replication exceeds its event budget.
class SimulationDiagnostic : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace shockrel
