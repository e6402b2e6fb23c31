#pragma once

#include <stdexcept>
#include <string>

namespace kronfeat {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition (shape, range, count).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// An iterative numeric routine failed to converge.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A scalar function was evaluated outside its domain (e.g. log of a
/// non-positive eigenvalue).
class DomainError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Training diverged (non-finite objective).
class DivergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// A skeleton sequence could not be turned into a descriptor.
class DescriptorError : public Error {
 public:
  DescriptorError(std::string label, const std::string& what)
      : Error("descriptor for sample '" + label + "': " + what), label_(std::move(label)) {}

  const std::string& label() const noexcept { return label_; }

 private:
  std::string label_;
};

/// Malformed or invalid input data (dataset files, manifests, model files).
class DataError : public Error {
 public:
  using Error::Error;
};

/// The requested problem exceeds a hard size guard.
class TooLargeError : public ContractError {
 public:
  using ContractError::ContractError;
};

}  // namespace kronfeat
