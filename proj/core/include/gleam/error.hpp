#pragma once

#include <stdexcept>
#include <string>

namespace gleam {

/// Base class for every error raised by the library. `kind()` is a stable
/// machine-readable tag that the CLI copies into its error record.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

/// An argument lies outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& message) : Error("domain", message) {}
};

/// A design matrix column is constant or the information matrix is singular.
class DegenerateDesignError : public Error {
 public:
  explicit DegenerateDesignError(const std::string& message) : Error("degenerate_design", message) {}
};

/// Inputs disagree in shape or identifiers.
class AlignmentError : public Error {
 public:
  explicit AlignmentError(const std::string& message) : Error("alignment", message) {}
};

/// Malformed text input. The message carries file, line and column.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, std::size_t column, const std::string& what)
      : Error("parse", file + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        file_(file),
        line_(line),
        column_(column) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::string file_;
  std::size_t line_;
  std::size_t column_;
};

/// Underflow or a non-finite value inside a numerical kernel.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& message) : Error("numerical", message) {}
};

/// Binary file with a bad magic string, version or checksum.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& message) : Error("format", message) {}
};

/// Invalid configuration value detected before any computation starts.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config", message) {}
};

}  // namespace gleam
