#pragma once

#include <stdexcept>
#include <string>

namespace rdcrit {

// Raised when model data violates a construction invariant (negative pmf,
// non-finite distortion, shape mismatch, ...).
class InvalidModelError : public std::runtime_error {
 public:
  explicit InvalidModelError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a requested distortion level lies outside the solvable range.
// Carries the range so callers can report it.
class DistortionRangeError : public std::out_of_range {
 public:
  DistortionRangeError(const std::string& what, double lo, double hi)
      : std::out_of_range(what), lo_(lo), hi_(hi) {}
  double lower() const { return lo_; }
  double upper() const { return hi_; }

 private:
  double lo_;
  double hi_;
};

// Raised when an iterative solve exhausts its budget. Carries the last
// residual for diagnostics.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace rdcrit
