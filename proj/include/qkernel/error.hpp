#pragma once

#include <stdexcept>
#include <string>

namespace qk {

/// Bad input: wrong shapes, out-of-range hyperparameters, malformed files.
/// The CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not produce a trustworthy answer
/// (eigensolver failure, singular inverse, non-PSD kernel). Exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qk
