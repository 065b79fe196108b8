#pragma once

#include <stdexcept>
#include <string>

namespace spadecb {

// Base of every error thrown by the library. The C API maps each subclass onto
// a status code (see spadecb.h).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Input violates a documented precondition (uncentered image, non-commuting
// covariances handed to the commuting path, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Source with no light in it.
class InvalidSourceError : public Error {
 public:
  using Error::Error;
};

// Malformed text input. Row and column are 1-based; 0 means "not applicable".
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int row = 0, int column = 0)
      : Error(format(what, row, column)), row_(row), column_(column) {}
  int row() const { return row_; }
  int column() const { return column_; }

 private:
  static std::string format(const std::string& what, int row, int column) {
    if (row <= 0) return what;
    std::string s = what + " (row " + std::to_string(row);
    if (column > 0) s += ", column " + std::to_string(column);
    return s + ")";
  }
  int row_;
  int column_;
};

// Fock-space truncation too coarse for the requested accuracy.
class TruncationError : public Error {
 public:
  TruncationError(const std::string& what, int required_cutoff)
      : Error(what), required_cutoff_(required_cutoff) {}
  int required_cutoff() const { return required_cutoff_; }

 private:
  int required_cutoff_;
};

// Objective returned a non-finite value.
class OptimizerError : public Error {
 public:
  OptimizerError(const std::string& what, double at) : Error(what), at_(at) {}
  double at() const { return at_; }

 private:
  double at_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace spadecb
