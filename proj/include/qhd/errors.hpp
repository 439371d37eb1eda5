#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qhd {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A precondition of an operation was violated (length mismatch, bad parameter, ...).
class ContractViolation : public Error {
public:
  using Error::Error;
};

/// The state carries no information to work with (e.g. an all-zero wavefunction).
class DegenerateState : public Error {
public:
  using Error::Error;
};

/// A density that should decay at the domain edges does not.
class BoundaryDecayError : public Error {
public:
  using Error::Error;
};

/// No admissible eigenpair was found near the requested energy.
class NotFoundError : public Error {
public:
  using Error::Error;
};

class SolverFailure : public Error {
public:
  using Error::Error;
};

/// NaN or Inf appeared in a field during time stepping.
class DivergenceError : public Error {
public:
  DivergenceError(const std::string& field, std::size_t node, double time)
      : Error("non-finite " + field + " at node " + std::to_string(node) + ", t = " +
              std::to_string(time)),
        field_(field), node_(node), time_(time) {}

  const std::string& field() const noexcept { return field_; }
  std::size_t node() const noexcept { return node_; }
  double time() const noexcept { return time_; }

private:
  std::string field_;
  std::size_t node_;
  double time_;
};

/// Scenario file problem; line and column are 1-based, 0 when not applicable.
class ConfigError : public Error {
public:
  ConfigError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : Error(line == 0 ? what
                        : "line " + std::to_string(line) + ", column " + std::to_string(column) +
                              ": " + what),
        line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace qhd
