#pragma once

#include <stdexcept>
#include <string>

namespace rwre {

// Bad configuration: invalid family parameters, malformed documents, unknown
// keys. The CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A moment E eta^x requested outside the family's finiteness domain.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A moment matrix with no strictly positive power.
class RegularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested enumeration or materialization exceeds the configured budget.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition of an operation does not hold for the given environment.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rwre
