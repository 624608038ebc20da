#pragma once

#include <stdexcept>
#include <string>

namespace fracmix {

/// Argument outside the mathematical domain of an operation (x <= 0 for K_nu, p = 0 for a quantile, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Result not representable as a finite positive double.
class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

/// Numerical procedure failed: quadrature did not converge, non-finite ODE state, ...
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace fracmix
