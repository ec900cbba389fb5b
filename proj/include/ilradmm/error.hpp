#pragma once

#include <stdexcept>
#include <string>

namespace ilradmm {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  DimensionError(const std::string& what, long expected, long actual)
      : Error(what + ": expected dimension " + std::to_string(expected) +
              ", got " + std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  long expected() const { return expected_; }
  long actual() const { return actual_; }

 private:
  long expected_;
  long actual_;
};

// Argument outside the mathematical domain of a function (e.g. s < 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or construction parameters.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// An iterative numerical routine hit its iteration cap or broke down.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, long offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  long offset() const { return offset_; }

 private:
  long offset_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

inline void require_dim(const char* what, long expected, long actual) {
  if (expected != actual) throw DimensionError(what, expected, actual);
}

}  // namespace ilradmm
