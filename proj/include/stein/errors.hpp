#pragma once

#include <stdexcept>
#include <string>

namespace stein {

/// Argument outside the mathematical domain of a function (x <= 0 for Gamma, r < 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A named precondition of a bound or operation was violated.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Quadrature failed to reach tolerance. Carries the last two estimates.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double previous, double last)
      : std::runtime_error(what + " (previous estimate " + std::to_string(previous) +
                           ", last estimate " + std::to_string(last) + ")"),
        previous_(previous),
        last_(last) {}

  double previous() const noexcept { return previous_; }
  double last() const noexcept { return last_; }

 private:
  double previous_;
  double last_;
};

/// Feature requested outside the supported scope (e.g. r > 8 moment interpolation).
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stein
