#pragma once

#include <stdexcept>
#include <string>

namespace oqft {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An index, occupation or dimension outside the allowed range.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Two drive components collide inside the guard band.
class SynthesisError : public Error {
 public:
  using Error::Error;
};

/// Numerical propagation lost unitarity beyond the configured tolerance.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// Invalid scenario configuration. Carries the 1-based source line when known.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace oqft
