#pragma once

#include <stdexcept>
#include <string>

namespace dil {

// Every failure raised by the library derives from Error so callers (and the
// CLI exit-code mapping) can dispatch on the concrete type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvariantError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, int iterations, double worst_residual)
      : Error(what), iterations_(iterations), worst_residual_(worst_residual) {}

  int iterations() const { return iterations_; }
  double worst_residual() const { return worst_residual_; }

 private:
  int iterations_;
  double worst_residual_;
};

}  // namespace dil
