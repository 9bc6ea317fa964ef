#pragma once

#include <stdexcept>
#include <string>

namespace specorb {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A differentiable elementary function was evaluated outside its domain.
class DomainError : public Error {
 public:
  explicit DomainError(std::string op)
      : Error("domain error in " + op), op_(std::move(op)) {}
  const std::string& op() const noexcept { return op_; }

 private:
  std::string op_;
};

/// Invalid configuration or argument supplied by a caller.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure inside the pipeline (propagation, non-finite gradients).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace specorb
