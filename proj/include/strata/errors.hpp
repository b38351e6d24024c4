#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace strata {

/// Base class for all engine errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Syntax error with source position (1-based line and column).
class ParseError : public Error {
 public:
  ParseError(std::string msg, std::size_t line, std::size_t column)
      : Error("parse error at " + std::to_string(line) + ":" +
              std::to_string(column) + ": " + msg),
        message_(std::move(msg)),
        line_(line),
        column_(column) {}

  const std::string& message() const { return message_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::string message_;
  std::size_t line_;
  std::size_t column_;
};

/// Program failed validation (safety, arity, declarations).
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

/// Negation cycle found during stratification; carries the predicate cycle.
class StratificationError : public Error {
 public:
  StratificationError(std::string msg, std::vector<std::string> cycle)
      : Error(std::move(msg)), cycle_(std::move(cycle)) {}

  const std::vector<std::string>& cycle() const { return cycle_; }

 private:
  std::vector<std::string> cycle_;
};

/// File access or format failure while loading or exporting.
class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

/// Input value did not fit the declared column type.
class CoercionError : public Error {
 public:
  CoercionError(const std::string& predicate, std::size_t position,
                const std::string& value, std::size_t line)
      : Error("type mismatch for " + predicate + " position " +
              std::to_string(position + 1) + ": cannot coerce \"" + value +
              "\" (line " + std::to_string(line) + ")") {}
  explicit CoercionError(const std::string& msg) : Error(msg) {}
};

/// A configured resource limit (facts, iterations, wall clock) was exceeded.
class LimitError : public Error {
 public:
  explicit LimitError(const std::string& msg) : Error(msg) {}
};

/// Lookup of a dictionary id that was never assigned.
class UnknownIdError : public Error {
 public:
  explicit UnknownIdError(std::uint64_t id)
      : Error("unknown value id " + std::to_string(id)) {}
};

}  // namespace strata
