#pragma once

#include <stdexcept>
#include <string>

namespace tsg {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// invalid model description (template, topology, cable attachment)
struct ModelError : Error {
  using Error::Error;
};

struct DimensionError : ModelError {
  using ModelError::ModelError;
};

// scenario text could not be parsed or validated
struct ParseError : Error {
  using Error::Error;
};

// a solve was requested from a state that does not meet its preconditions
struct PreconditionError : Error {
  using Error::Error;
};

struct SolverError : Error {
  SolverError(const std::string& what, double residual = 0.0) : Error(what), residual(residual) {}
  double residual;
};

}  // namespace tsg
