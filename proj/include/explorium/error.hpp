#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace explorium {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape mismatches and invalid structural configuration.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf encountered in a forward or backward pass, or a non-finite loss.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint stream violations (bad magic, unsupported version, truncated record).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Misuse of an API contract, e.g. backward() on a non-scalar.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Run-config parse failure. Carries the offending line (1-based, 0 when the
/// problem is not tied to a line) and key.
class ConfigParseError : public Error {
 public:
  ConfigParseError(std::size_t line, std::string key, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + (key.empty() ? "" : key + ": ") + what),
        line_(line),
        key_(std::move(key)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  std::size_t line_;
  std::string key_;
};

}  // namespace explorium
