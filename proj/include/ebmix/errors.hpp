#pragma once

#include <stdexcept>
#include <string>

namespace ebmix {

// Invalid distribution or estimator parameters.
class ParameterError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed, non-finite or degenerate input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ElicitationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when the sampler reaches a state with a non-finite log target.
class ChainHealthError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical optimizer failed to converge.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ebmix
