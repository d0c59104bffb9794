#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gplab {

/// Argument outside an operation's mathematical domain (negative radius, N = 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid setup: bad grid, memory budget exceeded, malformed config.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: NaN, non-convergent integration.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Iterative method hit its iteration cap; carries the last residual.
class ConvergenceError : public SolverError {
 public:
  using SolverError::SolverError;
};

using WarningHandler = std::function<void(std::string_view)>;

/// Installs a sink for non-fatal diagnostics; returns the previous one.
/// The default handler prints "warning: ..." to standard error.
WarningHandler set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

}  // namespace gplab
