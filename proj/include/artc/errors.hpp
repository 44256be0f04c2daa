#pragma once

#include <stdexcept>
#include <string>

namespace artc {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Missing or malformed columns, empty input.
class SchemaError : public Error {
public:
  using Error::Error;
};

/// A cell could not be parsed; `row()` is the 1-based data row (header excluded).
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t row) : Error(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

private:
  std::size_t row_;
};

class DuplicateObservationError : public Error {
public:
  using Error::Error;
};

class UnknownFactorError : public Error {
public:
  using Error::Error;
};

/// A combination of factor levels required by an analysis has no rows.
class EmptyCellError : public Error {
public:
  using Error::Error;
};

/// The subject structure does not support the requested design kind.
class DesignError : public Error {
public:
  using Error::Error;
};

class EstimabilityError : public Error {
public:
  using Error::Error;
};

/// The variance-ratio search for the random-intercept model did not settle.
class NonConvergenceError : public Error {
public:
  using Error::Error;
};

class DegenerateVarianceError : public Error {
public:
  using Error::Error;
};

class InsufficientDataError : public Error {
public:
  using Error::Error;
};

class InvalidArgumentError : public Error {
public:
  using Error::Error;
};

}  // namespace artc
