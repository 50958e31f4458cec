#pragma once

#include <stdexcept>
#include <string>

namespace htbif {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A standing hypothesis on the parameters or an argument range is violated.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The requested solution does not exist for these parameters.
class NoSolutionError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// The fixed-step integrator failed its accuracy watchdog or left the domain.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// Newton iteration did not reach tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// An iterate left the positive cone.
class PositivityError : public Error {
 public:
  using Error::Error;
};

class GridMismatchError : public Error {
 public:
  using Error::Error;
};

/// A linearization has an eigenvalue too close to zero to be inverted.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace htbif
