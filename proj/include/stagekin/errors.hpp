#pragma once

#include <stdexcept>
#include <string>

namespace stagekin {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input is geometrically or numerically degenerate (collinear points,
/// empty groups, missing acquisition coverage, singular fits).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

/// A file or in-memory structure violates the expected schema.
class SchemaViolation : public Error {
 public:
  using Error::Error;
};

/// Filesystem-level failure (missing file, unwritable directory).
class IoError : public Error {
 public:
  using Error::Error;
};

/// A linear system was solvable but too ill-conditioned to trust.
class ConditioningError : public Error {
 public:
  ConditioningError(const std::string& what, double condition_number)
      : Error(what), condition_number(condition_number) {}

  double condition_number;
};

}  // namespace stagekin
