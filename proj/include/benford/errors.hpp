#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace benford {

// Base of every error raised by the library. Callers that only care about
// "something about the input was wrong" can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Zero, infinite or NaN value where a significand is required.
class ZeroOrNonFiniteError : public DomainError {
 public:
  using DomainError::DomainError;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  // 1-based line number in the input file, 0 when not parsing a file.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A syntactically valid decimal whose numeric value is zero.
class ZeroValueError : public ParseError {
 public:
  using ParseError::ParseError;
};

class EmptySampleError : public Error {
 public:
  EmptySampleError() : Error("sample is empty") {}
  using Error::Error;
};

// Invalid parameters for a sampling model.
class ModelError : public Error {
 public:
  using Error::Error;
};

// Requested Monte Carlo run would exceed the configured memory ceiling.
class BudgetError : public Error {
 public:
  using Error::Error;
};

}  // namespace benford
