#pragma once

#include <stdexcept>
#include <string>

namespace premium {

// Process exit codes used by the command-line tool. Library code only throws;
// the mapping to exit codes lives here so every layer agrees on it.
enum class ErrorKind {
  kUsage = 2,
  kValidation = 3,
  kIo = 4,
  kNumeric = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

// Bad input data or a violated precondition on values.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error(ErrorKind::kValidation, message) {}
};

// Missing/unreadable/unwritable files, corrupt or mismatched documents.
class IoError : public Error {
 public:
  explicit IoError(const std::string& message)
      : Error(ErrorKind::kIo, message) {}
};

// Undefined arithmetic: zero variance, zero denominators.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& message)
      : Error(ErrorKind::kNumeric, message) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& message)
      : Error(ErrorKind::kUsage, message) {}
};

}  // namespace premium
