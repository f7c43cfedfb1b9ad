#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace extclosed {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based, or 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A symbol is missing, has the wrong arity, or two vocabularies disagree.
class VocabularyError : public Error {
 public:
  using Error::Error;
};

/// Preconditions on structures (ordering, sizes, index ranges) were violated.
class StructureError : public Error {
 public:
  using Error::Error;
};

/// Evaluation of a formula or program could not proceed (unbound variable, bad goal).
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// A search refused to run (or aborted) because it would exceed its state budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace extclosed
