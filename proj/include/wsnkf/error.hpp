#pragma once

#include <stdexcept>
#include <string>

namespace wsnkf {

// Invalid scenario or model parameters. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Singular innovation, no stationary distribution, estimation failures.
// The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class NoStationaryDistribution : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SearchSpaceTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wsnkf
