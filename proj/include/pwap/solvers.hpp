#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pwap/geometry.hpp"
#include "pwap/lobpcg.hpp"
#include "pwap/model.hpp"

namespace pwap {

struct ScfOptions {
  double mixing = 0.7;
  int max_iterations = 200;
  // Stop when ||R(P)||_F <= tolerance.
  double tolerance = 1e-10;
  // Final eigensolver residual; 0 picks 0.1 * tolerance / sqrt(2 N_el).
  double eig_tolerance = 0.0;
  int eig_max_iterations = 1000;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  double residual_norm = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> energy_history;
  std::vector<double> residual_history;
  std::vector<int> eigensolver_iterations;
  std::string message;
};

struct GroundState {
  OrbitalSet orbitals;
  Eigen::VectorXd eigenvalues;
  double energy = 0.0;
  SolveReport report;
};

// Lowest plane waves plus a small seeded perturbation, n_cols columns.
Eigen::MatrixXcd initial_guess(const PlaneWaveBasis& basis, Eigen::Index n_cols, std::uint64_t seed);

// Lowest nev eigenpairs of a fixed Hamiltonian with a kinetic preconditioner.
EigenResult<cplx> lowest_eigenpairs(const Hamiltonian& h, int nev, double tol, int max_iterations,
                                    const Eigen::MatrixXcd& guess, std::uint64_t seed = 1);

// Self-consistent field iteration with simple density mixing. Never throws on
// non-convergence; the report carries converged = false instead.
GroundState scf(const MeanFieldModel& model, std::shared_ptr<const PlaneWaveBasis> basis,
                const ScfOptions& options = {});

// 1 on coefficients with |G|^2/2 <= ecut, 0 elsewhere.
Eigen::VectorXd coarse_mask(const PlaneWaveBasis& basis, double ecut);

struct LinearSolveOptions {
  double tolerance = 1e-10;
  int max_iterations = 1000;
  // Confine the solve to tangent components inside this mask.
  std::optional<Eigen::VectorXd> restrict_mask;
};

struct LinearSolveReport {
  int iterations = 0;
  double relative_residual = 0.0;
};

// Solves (Omega + K) Xi = rhs on the tangent space by CG preconditioned with
// M^(-1). Throws IndefiniteError on a nonpositive curvature direction and
// ConvergenceError when the iteration budget runs out.
TangentSet solve_omega_plus_k(const TangentOperators& ops, const OrbitalMetric& metric,
                              const TangentSet& rhs, const LinearSolveOptions& options = {},
                              LinearSolveReport* report = nullptr);
TangentSet solve_omega_plus_k(const MeanFieldModel& model, const OrbitalSet& orbitals,
                              const TangentSet& rhs, double tol,
                              std::optional<double> restrict_to_coarse = std::nullopt);

// Zero-pads orbitals into a basis containing every plane wave of theirs.
OrbitalSet lift(const OrbitalSet& orbitals, std::shared_ptr<const PlaneWaveBasis> target);
// Truncates orbitals onto a smaller basis (no reorthonormalization).
OrbitalSet restrict_to(const OrbitalSet& orbitals, std::shared_ptr<const PlaneWaveBasis> target);

// Y (Y^* Y)^(-1/2)
Eigen::MatrixXcd retract(const Eigen::MatrixXcd& y);

struct NewtonResult {
  OrbitalSet orbitals;
  TangentSet step;
  LinearSolveReport solve;
};

// One Newton step on the fine basis from a coarse solution:
// retract(Phi - (Omega + K)^(-1) R(Phi)).
NewtonResult newton_step(const MeanFieldModel& model, std::shared_ptr<const PlaneWaveBasis> fine,
                         const OrbitalSet& coarse, double tol);

}  // namespace pwap
