#pragma once

#include <stdexcept>
#include <string>

namespace qobs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range parameters.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Operation applied to a tensor outside its admissible region.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Gradient requested where the smallest eigenvalue is not simple.
class DegenerateEigenvalue : public Error {
 public:
  using Error::Error;
};

/// An iterative method ran out of iterations.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// Line search could not make progress.
class StagnationError : public Error {
 public:
  StagnationError(const std::string& what, double residual, int iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// A configuration or boundary condition failed validation.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace qobs
