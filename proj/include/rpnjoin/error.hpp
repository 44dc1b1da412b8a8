#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace rpnjoin {

// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Empty or inverted key interval handed to the generator.
class InvalidRangeError : public Error {
 public:
  using Error::Error;
};

// Text input (relation CSV, plan expression, RPN text) that does not parse.
// line and column are 1-based; column is 0 when only the line is known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column = 0)
      : Error(format(what, line, column)), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line, std::size_t column) {
    std::string out = "line " + std::to_string(line);
    if (column != 0) {
      out += ", column " + std::to_string(column);
    }
    return out + ": " + what;
  }

  std::size_t line_;
  std::size_t column_;
};

// Relation name missing from (or duplicated in) a catalog.
class CatalogError : public Error {
 public:
  using Error::Error;
};

// A join would emit more tuples than JoinResultPolicy allows.
class CardinalityLimitError : public Error {
 public:
  explicit CardinalityLimitError(std::uint64_t limit)
      : Error("join output exceeds the limit of " + std::to_string(limit) + " tuples"),
        limit_(limit) {}

  std::uint64_t limit() const noexcept { return limit_; }

 private:
  std::uint64_t limit_;
};

// RPN program that is not a well-formed postfix join expression.
class MalformedProgramError : public Error {
 public:
  enum class Reason { kEmptyProgram, kStackUnderflow, kLeftoverOperands };

  MalformedProgramError(Reason reason, std::size_t token_index, const std::string& what)
      : Error(what), reason_(reason), token_index_(token_index) {}

  Reason reason() const noexcept { return reason_; }
  // Index of the offending token, or the program length for end-of-program errors.
  std::size_t token_index() const noexcept { return token_index_; }

 private:
  Reason reason_;
  std::size_t token_index_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace rpnjoin
