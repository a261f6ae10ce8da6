#pragma once

#include <stdexcept>
#include <string>

namespace dobcoord {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incompatible or invalid matrix/vector dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed to converge or produced an unusable result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A model, graph, schedule, or scenario violates a structural requirement.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Gain synthesis could not produce a gain satisfying its contract.
class SynthesisError : public Error {
 public:
  using Error::Error;
};

/// A linear matrix system is inconsistent; carries the best residual found.
class NoSolutionError : public Error {
 public:
  NoSolutionError(const std::string& msg, double residual)
      : Error(msg), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// A non-periodic switching schedule was queried past its last segment.
class ScheduleExhaustedError : public Error {
 public:
  using Error::Error;
};

/// The integrated state left the finite range; carries the time of failure.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& msg, double time)
      : Error(msg), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Scenario text could not be parsed; carries the 1-based source location.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line, int column)
      : Error(msg + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace dobcoord
