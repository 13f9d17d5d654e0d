#pragma once

#include <stdexcept>
#include <string>

namespace dlambert {

// Evaluation at the collision singularity x = 0 or another invalid argument.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Numerical failure: step-size underflow, step budget exhausted, bracket
// expansion failure, stalled continuation.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed user input (JSON field / run configuration).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace dlambert
