#pragma once

#include <stdexcept>
#include <string>

namespace nedyn {

/// Root of every exception the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Register sizes or matrix shapes disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A numeric argument is out of its domain (NaN angle, negative step, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// An operation was called on a value that breaks its precondition,
/// e.g. expectation() of a non-Hermitian sum.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A numerical invariant failed during a computation (norm blowup,
/// partial-trace asymmetry, imaginary energy).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A dense path was requested on a register beyond the configured guard.
class ResourceError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

/// A Pauli sum acts with X or Y on a qubit that tapering assumes is a
/// Z-type symmetry.
class SymmetryError : public Error {
 public:
  using Error::Error;
};

/// Input data is malformed (non-Hermitian integrals, inconsistent layout).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

/// Run configuration is inconsistent (e.g. dt * n_steps != t_f).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Text input could not be parsed. Carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, int line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace nedyn
