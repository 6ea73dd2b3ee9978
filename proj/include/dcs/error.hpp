#pragma once

#include <stdexcept>
#include <string>

namespace dcs {

// Bad input content: malformed records, precondition violations, ordering.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : ValidationError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConflictError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class OrderingError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DivergenceError : public ValidationError {
 public:
  DivergenceError(const std::string& what, int epoch) : ValidationError(what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

// Filesystem level failures (cannot open, short write).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dcs
