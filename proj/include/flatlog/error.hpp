#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flatlog {

// Base for every error the engine reports. The CLI maps the concrete kinds
// onto exit codes (program errors 1, I/O 2, internal invariants 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Syntax or semantic error in a Datalog source (arity, safety, ...).
class ProgramError : public Error {
 public:
  ProgramError(const std::string& msg, std::size_t line = 0, std::size_t column = 0)
      : Error(line == 0 ? msg
                        : std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// A broken engine invariant: count/materialize divergence, unsorted storage,
// overlapping writes. Always a bug, never bad input.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace flatlog
