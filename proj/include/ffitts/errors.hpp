#pragma once

#include <stdexcept>
#include <string>

namespace ffitts {

// Base for every failure the library reports by exception. Math-domain
// problems that must not abort a batch (W_f undefined, ID domain violations)
// are values instead; see MathError in id_models.hpp.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates a documented precondition or type invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Too little data or zero spread where a spread is required.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t row, const std::string& what)
      : Error("row " + std::to_string(row) + ": " + what), row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class DuplicateConditionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UnknownDatasetError : public Error {
 public:
  using Error::Error;
};

// Regression with constant regressor (or too few points).
class SingularFitError : public Error {
 public:
  using Error::Error;
};

// sigma_obs^2 vs W^2 intercept <= 0: no finger tremor term can be extracted.
class NonPhysicalInterceptError : public Error {
 public:
  using Error::Error;
};

class UnsupportedSizeError : public Error {
 public:
  using Error::Error;
};

}  // namespace ffitts
