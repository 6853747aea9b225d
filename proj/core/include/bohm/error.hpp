#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bohm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two operands live on incompatible grids or have mismatched lengths.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A time-stepping scheme produced non-finite values or was refused by the
/// stability gate.
class InstabilityError : public Error {
 public:
  InstabilityError(const std::string& what, double stability_factor)
      : Error(what), stability_factor_(stability_factor) {}
  double stability_factor() const noexcept { return stability_factor_; }

 private:
  double stability_factor_;
};

/// The discretization step is too coarse for the requested operation.
class StepSizeError : public Error {
 public:
  using Error::Error;
};

/// The configuration is well-formed but describes a case the solver does not
/// handle.
class UnsupportedConfigError : public Error {
 public:
  using Error::Error;
};

/// A scenario or integrator configuration is invalid. Carries the offending
/// line (1-based, 0 when not tied to a line) and key when known.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, std::size_t line = 0, std::string key = {})
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line),
        key_(std::move(key)) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  std::size_t line_;
  std::string key_;
};

/// A finite run ended before the quantity of interest became well defined.
class InconclusiveRunError : public Error {
 public:
  using Error::Error;
};

}  // namespace bohm
