#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace pwap {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;

 protected:
  static std::string format(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
  }
};

// An iterative method stopped before reaching its tolerance.
struct ConvergenceError : Error {
  ConvergenceError(const std::string& what, double residual_norm, int iterations)
      : Error(what + " (residual " + format(residual_norm) + " after " +
              std::to_string(iterations) + " iterations)"),
        residual(residual_norm),
        iterations(iterations) {}
  double residual;
  int iterations;
};

// A tangent vector violates Phi^* Xi = 0.
struct GaugeError : Error {
  using Error::Error;
};

// (Omega + K) showed a nonpositive curvature direction.
struct IndefiniteError : Error {
  IndefiniteError(const std::string& what, double curvature)
      : Error(what + " (curvature " + format(curvature) + ")"), curvature(curvature) {}
  double curvature;
};

}  // namespace pwap
