#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fracross {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoInvariantMeasure : public Error {
 public:
  using Error::Error;
};

class NotSymmetric : public Error {
 public:
  using Error::Error;
};

class InvalidCutoff : public Error {
 public:
  using Error::Error;
};

class EpsilonTooLarge : public Error {
 public:
  using Error::Error;
};

class RhoUnresolved : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class MissingMollifier : public Error {
 public:
  using Error::Error;
};

class NonAdmissible : public Error {
 public:
  using Error::Error;
};

class NonPositiveField : public Error {
 public:
  using Error::Error;
};

class UnresolvedPotential : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class SnapshotError : public Error {
 public:
  using Error::Error;
};

}  // namespace fracross
