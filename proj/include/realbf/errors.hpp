#pragma once

#include <stdexcept>
#include <string>

namespace realbf {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Invalid index combination, e.g. |m| > n for a spherical harmonic.
class IndexError : public Error {
public:
  using Error::Error;
};

/// Floating-point breakdown (underflow to zero where a divisor is needed).
class NumericError : public Error {
public:
  using Error::Error;
};

/// Quadratic-form matrix is singular, indefinite or too ill-conditioned.
class SingularMatrixError : public Error {
public:
  using Error::Error;
};

/// Requested constraint cannot be met, e.g. a sensitivity cap below T_min.
class InfeasibleError : public Error {
public:
  using Error::Error;
};

/// Look-direction manifold leaves no usable real projection.
class DegenerateError : public Error {
public:
  using Error::Error;
};

/// Iterative procedure (quadrature refinement, beta bisection) failed.
class ConvergenceError : public Error {
public:
  using Error::Error;
};

/// Malformed input files, layouts or configuration.
class InputError : public Error {
public:
  using Error::Error;
};

} // namespace realbf
