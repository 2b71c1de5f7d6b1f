#pragma once

#include <stdexcept>
#include <string>

namespace dphc {

// Base for every error the library raises. The CLI maps the subclasses onto
// its exit codes (validation 2, I/O 3, numeric 4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates a documented precondition or invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// File could not be read, written or parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or a numerical routine that failed to converge.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace dphc
