#pragma once

#include <stdexcept>
#include <string>

namespace slln {

/// Malformed arguments: shape mismatches, out-of-range indices, bad parameters.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The request is well-formed but not computable in this model
/// (e.g. an exact induced norm for a general exponent p).
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A positive form whose Gram matrix is not Hermitian positive semidefinite.
class FormInvariantError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace slln
