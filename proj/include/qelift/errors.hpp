#pragma once

#include <stdexcept>
#include <string>

namespace qelift {

// Bad user-supplied data or configuration: malformed files, out-of-range
// parameters, inconsistent shapes. Maps to exit code 1 in the CLI.
class InputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Structurally incompatible dimensions between objects that must agree.
class DimensionError : public InputError {
public:
  using InputError::InputError;
};

// Scalar parameter outside its admissible range (e.g. prox weights).
class ParameterError : public InputError {
public:
  using InputError::InputError;
};

// Problem too large for a dense materialization guard.
class CapacityError : public InputError {
public:
  using InputError::InputError;
};

// Runtime numerical failure. Maps to exit code 2 in the CLI.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Solver iterate left the finite range.
class DivergenceError : public NumericalError {
public:
  DivergenceError(const std::string& what, int iteration)
      : NumericalError(what), iteration(iteration) {}
  int iteration;
};

// An output too degenerate to post-process (e.g. no positive eigenvalue
// to extract a signal from).
class DegenerateOutputError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

}  // namespace qelift
