#pragma once

#include <stdexcept>
#include <string>

namespace triage {

// Process exit codes shared by every CLI subcommand.
enum class ExitCode : int {
  kOk = 0,
  kValidation = 1,
  kRuntime = 2,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const { return ExitCode::kRuntime; }
};

// Bad input data, bad configuration, violated preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const override { return ExitCode::kValidation; }
};

// File system failures.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace triage
