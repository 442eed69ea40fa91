#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace paramflux {

/// Base of every error raised by the library. `kind()` is a stable
/// machine-readable tag used in the CLI's error JSON.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

class ParseError : public Error {
public:
  ParseError(const std::string& message, std::size_t offset)
      : Error("parse_error", message + " at byte " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

class UnknownIdentifierError : public Error {
public:
  explicit UnknownIdentifierError(std::string name)
      : Error("unknown_identifier", "unknown identifier '" + name + "'"),
        name_(std::move(name)) {}

  const std::string& name() const noexcept { return name_; }

private:
  std::string name_;
};

/// Raised when an expression is evaluated outside its mathematical domain
/// (log of a non-positive value, 0 raised to a negative power, ...).
class DomainError : public Error {
public:
  explicit DomainError(const std::string& message) : Error("domain_error", message) {}
  DomainError(const std::string& message, std::size_t state_index)
      : Error("domain_error", message + " (state " + std::to_string(state_index) + ")"),
        state_index_(state_index), has_state_(true) {}

  bool has_state_index() const noexcept { return has_state_; }
  std::size_t state_index() const noexcept { return state_index_; }

private:
  std::size_t state_index_ = 0;
  bool has_state_ = false;
};

/// A non-finite state appeared while integrating; `time_index` is the output
/// column that could not be produced.
class DivergenceError : public Error {
public:
  explicit DivergenceError(std::size_t time_index)
      : Error("divergence", "integration diverged at time index " + std::to_string(time_index)),
        time_index_(time_index) {}

  std::size_t time_index() const noexcept { return time_index_; }

private:
  std::size_t time_index_;
};

class InvalidArgument : public Error {
public:
  explicit InvalidArgument(const std::string& message) : Error("invalid_argument", message) {}
  InvalidArgument(std::string kind, const std::string& message)
      : Error(std::move(kind), message) {}
};

}  // namespace paramflux
