#pragma once

#include <stdexcept>
#include <string>

namespace monowave {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation (negative radius, bad index, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed to reach its tolerance.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, double achieved)
      : Error(what + " (achieved error estimate " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}

  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// A requested computation would exceed its memory budget.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Missing or unreadable files and directories.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration or serialized input.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace monowave
