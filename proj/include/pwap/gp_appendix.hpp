#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pwap/solvers.hpp"

namespace pwap {

// 1D periodic Gross-Pitaevskii model on [0, 2 pi): -phi'' + V phi + phi^3 = lambda phi
// with V(x) = amplitude cos(x).
MeanFieldModel gp_model(double amplitude);

struct GpState {
  OrbitalSet orbitals;
  double lambda = 0.0;
  SolveReport report;
};

// Galerkin ground state on |k|^2/2 <= n, phase fixed so that the k = 0
// coefficient is real and positive.
GpState gp_ground_state(double amplitude, double n, const ScfOptions& options = {});

struct GpOptions {
  int reference_factor = 16;  // reference cutoff = factor * max cutoff
  double power_tolerance = 1e-6;
  int power_max_iterations = 2000;
  double solve_tolerance = 1e-11;
  std::uint64_t seed = 1;
  ScfOptions scf;
};

struct GpPoint {
  double n = 0.0;
  double norm = 0.0;
  double bound_fit = std::numeric_limits<double>::quiet_NaN();
  int power_iterations = 0;
  double lambda = 0.0;
};

struct GpVerification {
  std::vector<GpPoint> points;
  double reference_cutoff = 0.0;
  // norm ~ prefactor * ((1 + 2N)^(-1/2))^slope
  double slope = std::numeric_limits<double>::quiet_NaN();
  double prefactor = std::numeric_limits<double>::quiet_NaN();
  bool fitted = false;
  std::string warning;
};

// ||M^(1/2) (Omega + K)^(-1) M^(1/2) - I|| on X_N^perp (restricted to real
// functions) for one Galerkin cutoff, inside a basis of cutoff `reference`.
GpPoint difference_operator_norm(double amplitude, double n, double reference,
                                 const GpOptions& options = {});

GpVerification verify_proposition(double amplitude, std::vector<double> cutoffs,
                                  const GpOptions& options = {});

// V = 0: the operator is diagonal with entries (1 - 1/pi) / (k^2 + 1/pi).
double gp_constant_norm(double n);

// Least-squares slope and intercept of log(y) against log(x).
std::pair<double, double> loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace pwap
