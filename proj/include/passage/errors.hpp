#pragma once

#include <stdexcept>
#include <string>

namespace passage {

/// Argument outside the mathematical domain of an operation (t <= 0, NaN, lambda < 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Start point coincides with the barrier; densities are not defined.
class DegenerateProblemError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Operation is not defined for the drift regime of the problem.
class RegimeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Invalid or incomplete configuration (bad n, missing model parameter, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure: NaN from an integrand, nested quadrature breakdown.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Monte Carlo estimator had too few paths in the conditioning event.
class InsufficientSamplesError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace passage
