#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ltlfbeam {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed formula text. `offset()` is a byte offset into the input.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UndeclaredAtomError : public Error {
 public:
  explicit UndeclaredAtomError(std::string atom)
      : Error("undeclared atom '" + atom + "'"), atom_(std::move(atom)) {}
  const std::string& atom() const noexcept { return atom_; }

 private:
  std::string atom_;
};

/// The automaton construction exceeded its state budget.
class BudgetExceededError : public Error {
 public:
  using Error::Error;
};

class UnknownConceptError : public Error {
 public:
  using Error::Error;
};

/// Invalid user-supplied data: configs, tables, files.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

/// The decoding problem has no constraint-satisfying solution of the
/// requested length.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// A broken algorithmic invariant. Never expected in a correct build.
class InternalError : public Error {
 public:
  using Error::Error;
};

class ScorerError : public Error {
 public:
  using Error::Error;
};

class ScorerTimeoutError : public ScorerError {
 public:
  using ScorerError::ScorerError;
};

class ProtocolError : public ScorerError {
 public:
  using ScorerError::ScorerError;
};

class NormalizationError : public ScorerError {
 public:
  using ScorerError::ScorerError;
};

}  // namespace ltlfbeam
