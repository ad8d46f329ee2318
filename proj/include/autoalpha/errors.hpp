#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace autoalpha {

// Environment cannot supply the counterfactual reward needed for regret.
class UnsupportedEnvironmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Internal state violates an invariant (e.g. non-positive Beta parameters).
class InvalidStateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Raised when stepping an exhausted environment.
class EndOfStream : public std::runtime_error {
 public:
  EndOfStream() : std::runtime_error("environment exhausted") {}
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class EncodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid or missing configuration field. `field()` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Input data unreadable or inconsistent (missing files, misaligned logs).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace autoalpha
