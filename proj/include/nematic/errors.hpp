#pragma once

#include <stdexcept>
#include <string>

namespace nematic {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Newton or descent iteration ran out of budget.
class NoConvergence : public Error {
 public:
  NoConvergence(int iterations, double last_norm, const std::string& where = {})
      : Error("no convergence" + (where.empty() ? std::string{} : " (" + where + ")") +
              " after " + std::to_string(iterations) +
              " iterations, last residual " + std::to_string(last_norm)),
        iterations_(iterations),
        last_norm_(last_norm) {}

  int iterations() const noexcept { return iterations_; }
  double last_norm() const noexcept { return last_norm_; }

 private:
  int iterations_;
  double last_norm_;
};

/// Converged to a branch outside the cone u > 0, v < 0.
class SignViolation : public Error {
 public:
  using Error::Error;
};

/// Request for a mode the model does not support (b^2 = 0 on the infinite domain).
class RefusedMode : public Error {
 public:
  using Error::Error;
};

class RegimeMismatch : public Error {
 public:
  using Error::Error;
};

class SupportViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace nematic
