#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace doqkd {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter violates its type invariant or an operation precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Round-off pushed an invariant (e.g. I1^2 >= 4 I2) past its tolerance.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The measured noise admits no (eps, eta) pair satisfying the physicality constraints.
class NoPhysicalRegion : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  InsufficientData(const std::string& what, std::size_t required, std::size_t available)
      : Error(what + " (need " + std::to_string(required) + ", have " +
              std::to_string(available) + ")"),
        required_(required),
        available_(available) {}

  std::size_t required() const noexcept { return required_; }
  std::size_t available() const noexcept { return available_; }

 private:
  std::size_t required_;
  std::size_t available_;
};

/// A truncated series did not reach its tail bound.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double tail_bound)
      : Error(what + " (tail bound " + std::to_string(tail_bound) + ")"), tail_bound_(tail_bound) {}

  double tail_bound() const noexcept { return tail_bound_; }

 private:
  double tail_bound_;
};

/// Configuration problem. `field` is "section.key"; `line` is 0 when unknown.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, std::size_t line, const std::string& message)
      : Error(format(field, line, message)), field_(std::move(field)), line_(line) {}

  const std::string& field() const noexcept { return field_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& field, std::size_t line, const std::string& msg) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!field.empty()) out += field + ": ";
    return out + msg;
  }

  std::string field_;
  std::size_t line_;
};

}  // namespace doqkd
