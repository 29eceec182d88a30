#pragma once

#include <stdexcept>
#include <string>

namespace polytree {

/// Error raised for bad inputs or violated preconditions. `kind` is a short
/// machine-readable tag ("invalid_argument", "cap_exceeded", "parse_error", ...)
/// that the CLI forwards in its error report.
class DomainError : public std::runtime_error {
 public:
  DomainError(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// Raised when a computation produces a value that can only come from a bug,
// e.g. an entropy that is negative beyond round-off.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace polytree
