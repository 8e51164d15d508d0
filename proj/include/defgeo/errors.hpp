#pragma once

#include <stdexcept>
#include <string>

namespace defgeo {

// Error raised while reading structure files, formulas, spec files, or
// relation literals.  Carries the 1-based position of the offending token.
class ParseError : public std::runtime_error {
public:
  ParseError(std::string message, int line, int column)
      : std::runtime_error(message + " (line " + std::to_string(line) +
                           ", column " + std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

private:
  int line_;
  int column_;
};

// Raised when a computation would exceed one of the configured resource
// guards.  `guard()` names the guard that tripped so callers can report it.
class ResourceError : public std::runtime_error {
public:
  explicit ResourceError(std::string guard, std::string detail = {})
      : std::runtime_error(detail.empty() ? "resource guard exceeded: " + guard
                                          : "resource guard exceeded: " + guard +
                                                " (" + detail + ")"),
        guard_(std::move(guard)) {}

  const std::string& guard() const { return guard_; }

private:
  std::string guard_;
};

}  // namespace defgeo
