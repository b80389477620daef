#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace freqlab {

/// Base of every error raised by the library. Each subclass maps to one
/// failure class of the public contract (the CLI turns them into exit codes).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A parameter lies outside the domain where the requested formula exists.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Closed form is singular at these parameters (2Hα = D_L).
class DegenerateParameters : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class InvariantViolation : public Error {
 public:
  using Error::Error;
};

class SimulationDiverged : public Error {
 public:
  SimulationDiverged(const std::string& what, double time_s)
      : Error(what), time_s_(time_s) {}
  double time_s() const noexcept { return time_s_; }

 private:
  double time_s_;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, std::string field)
      : Error(what), line_(line), field_(std::move(field)) {}
  int line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  int line_;
  std::string field_;
};

class UnitMismatch : public Error {
 public:
  using Error::Error;
};

/// Oracle comparison requested on a series whose run had nonlinear elements
/// (dead-bands crossed, AGC, synthetic inertia, drift) active.
class RegimeMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace freqlab
