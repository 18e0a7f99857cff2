#pragma once

#include <stdexcept>
#include <string>

namespace hkc {

// Precondition violated by a caller-supplied argument.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data is malformed (non-finite values, inconsistent sizes).
class InvalidData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Object used in a state that does not support the operation.
class InvalidState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Text input could not be parsed; carries the 1-based row and column.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t col)
      : std::runtime_error(what + " (row " + std::to_string(row) + ", column " +
                           std::to_string(col) + ")"),
        row_(row),
        col_(col) {}

  std::size_t row() const { return row_; }
  std::size_t column() const { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

}  // namespace hkc
