#pragma once

#include <stdexcept>
#include <string>

namespace irf {

// Process exit codes shared by the CLI and the acceptance driver.
enum class ExitCode : int {
  ok = 0,
  config = 2,
  precondition = 3,
  assertion = 4,
  numeric = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

// Malformed configuration or model specification text.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ExitCode::config, what) {}
};

// Arguments outside the domain of an operation (invalid parameters, contraction violated, ...).
class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& what) : Error(ExitCode::precondition, what) {}
};

// A check that ran to completion and failed.
class AssertionFailure : public Error {
 public:
  explicit AssertionFailure(const std::string& what) : Error(ExitCode::assertion, what) {}
};

// Overflow, NaN, or a quadrature that did not converge.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ExitCode::numeric, what) {}
};

}  // namespace irf
