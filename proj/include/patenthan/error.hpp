#pragma once

#include <stdexcept>
#include <string>

namespace patenthan {

// Broad failure categories. The CLI maps each to its own exit code.
enum class ErrorKind {
  kInvalidInput,   // malformed corpus lines, bad file formats, precondition violations
  kIo,             // missing or unreadable files
  kShapeMismatch,  // tensor or config/model shape disagreement
  kNumeric,        // NaN/Inf, divergence
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what) : Error(ErrorKind::kInvalidInput, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(ErrorKind::kShapeMismatch, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::kNumeric, what) {}
};

}  // namespace patenthan
