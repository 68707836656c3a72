#pragma once

#include <stdexcept>
#include <string>

namespace thermovisc {

/// Argument outside the domain of a constitutive function (det F <= 0, theta < 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A discrete state violates det(grad y) > 0 at some quadrature point.
class InfeasibleStateError : public std::runtime_error {
 public:
  InfeasibleStateError(const std::string& what, std::size_t qp, double det_value)
      : std::runtime_error(what), qp_(qp), det_(det_value) {}
  std::size_t qp() const { return qp_; }
  double det_value() const { return det_; }

 private:
  std::size_t qp_;
  double det_;
};

/// Linear or nonlinear solver failure. Maps to CLI exit code 3.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration. Maps to CLI exit code 2. line() is 0 when the
/// problem is not tied to a single input line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace thermovisc
