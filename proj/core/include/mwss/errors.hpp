#pragma once

#include <stdexcept>
#include <string>

namespace mwss {

// Bad input, configuration, or file contents. Maps to CLI exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// NaN/Inf encountered in a loss or gradient. Maps to CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A weak set references a held-out test instance. Maps to CLI exit code 4.
class LeakGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mwss
