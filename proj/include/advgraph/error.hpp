#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace advgraph {

/// Malformed input text. `line()` is 1-based; 0 when no line applies.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Arguments that are well-typed but violate an operation's contract.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A flip list that cannot be replayed; `index()` is the offending flip.
class InvalidFlipError : public ValidationError {
 public:
  InvalidFlipError(const std::string& what, std::size_t index)
      : ValidationError("flip " + std::to_string(index) + ": " + what), index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace advgraph
