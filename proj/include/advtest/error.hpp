#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace advtest {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 1-based line/column into a specification document.
struct SourcePos {
  std::size_t line = 0;
  std::size_t column = 0;

  bool operator==(const SourcePos&) const = default;
  std::string str() const { return std::to_string(line) + ":" + std::to_string(column); }
};

/// Malformed token stream in a specification file.
class SyntaxError : public Error {
 public:
  SyntaxError(SourcePos pos, std::string message, std::string expected = {})
      : Error(pos.str() + ": syntax error: " + message +
              (expected.empty() ? std::string() : " (expected " + expected + ")")),
        pos_(pos),
        expected_(std::move(expected)) {}

  SourcePos pos() const { return pos_; }
  const std::string& expected() const { return expected_; }

 private:
  SourcePos pos_;
  std::string expected_;
};

/// Well-formed syntax with inconsistent content (inverted range, unknown key, ...).
class SemanticError : public Error {
 public:
  SemanticError(SourcePos pos, std::string field, const std::string& message)
      : Error(pos.str() + ": " + field + ": " + message), pos_(pos), field_(std::move(field)) {}

  SourcePos pos() const { return pos_; }
  const std::string& field() const { return field_; }

 private:
  SourcePos pos_;
  std::string field_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Violation of the external-controller wire protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Non-finite state or control encountered while stepping.
class SimulationError : public Error {
 public:
  using Error::Error;
};

class LedgerError : public Error {
 public:
  using Error::Error;
};

}  // namespace advtest
