#pragma once

#include <stdexcept>
#include <string>

namespace tailcluster {

/// Invalid input or configuration. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure (e.g. covariance not positive definite after jitter).
/// The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model or construction produced a draw that breaks its own contract,
/// e.g. a zero normalizer on a positive-weight draw. Exit code 3.
class ContractViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejection sampling accepted nothing within its draw budget.
class DegenerateConditioning : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace tailcluster
