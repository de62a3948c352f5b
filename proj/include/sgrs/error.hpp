#ifndef SGRS_ERROR_HPP
#define SGRS_ERROR_HPP

#include <stdexcept>
#include <string>

namespace sgrs {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: bad step cap, mismatched action spaces, malformed files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A state that violates an environment precondition (e.g. stepping from a wall).
class InvalidStateError : public Error {
 public:
  using Error::Error;
};

/// A matcher applied to a state of the wrong kind.
class TypeError : public Error {
 public:
  using Error::Error;
};

/// Input outside a function's numeric domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Work that would exceed a fixed resource budget.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Validation failure that names the offending field.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)), message_(message) {}

  const std::string& field() const noexcept { return field_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string field_;
  std::string message_;
};

}  // namespace sgrs

#endif  // SGRS_ERROR_HPP
