#pragma once

#include <algorithm>
#include <random>
#include <stdexcept>

#include "dense_oracle.hpp"
#include "fixtures.hpp"
#include "pwap/solvers.hpp"

namespace oracle {

struct Discrepancies {
  double residual = 0.0;
  double omega = 0.0;
  double k = 0.0;
  double metric = 0.0;  // worst over powers -1, -1/2, 1/2, 1
  double solve = 0.0;
  double scale = 0.0;   // largest reference norm seen, for context
  std::size_t basis_size = 0;

  double worst() const { return std::max({residual, omega, k, metric, solve}); }
};

inline void check_model(const pwap::MeanFieldModel& model, double ecut, std::mt19937_64& rng,
                        Discrepancies& d) {
  using namespace pwap;
  const auto basis = fixtures::basis(model, ecut);
  const Eigen::Index n = static_cast<Eigen::Index>(basis->size());
  d.basis_size = std::max(d.basis_size, basis->size());
  const GroundState gs = scf(model, basis, fixtures::tight());
  if (!gs.report.converged) throw std::runtime_error("oracle fixture did not converge");
  const Mat random_phi = random_orthonormal(n, 2, rng);

  auto note = [&d](double& slot, const Mat& ours, const Mat& ref) {
    slot = std::max(slot, (ours - ref).norm());
    d.scale = std::max(d.scale, ref.norm());
  };

  for (const Mat& phi : {gs.orbitals.phi, random_phi}) {
    const OrbitalSet orbitals{basis, phi};
    const Mat p = phi * phi.adjoint();
    const Mat h = hamiltonian(model, *basis, p);
    const TangentOperators ops(model, orbitals);
    const Mat xi = random_tangent(phi, rng);
    const Mat x = tangent_matrix(phi, xi);

    note(d.residual, tangent_matrix(phi, ops.residual().xi), residual(p, h));
    note(d.omega, tangent_matrix(phi, ops.omega({xi}).xi), omega(p, h, x));
    note(d.k, tangent_matrix(phi, ops.k({xi}).xi), k(model, *basis, p, x));

    const Super m = metric(model, *basis, phi, h);
    const OrbitalMetric om = OrbitalMetric::kinetic(ops);
    for (double s : {-1.0, -0.5, 0.5, 1.0}) {
      const Mat ref = unvec(hermitian_power(m, s) * vec(x), n);
      note(d.metric, tangent_matrix(phi, om.apply_power({xi}, s).xi), ref);
    }
  }

  // Linear solve at the ground state, where Omega + K is coercive.
  {
    const Mat& phi = gs.orbitals.phi;
    const Mat p = phi * phi.adjoint();
    const Mat h = hamiltonian(model, *basis, p);
    const Super s = assemble(n, [&](const Mat& x) -> Mat { return omega(p, h, x) + k(model, *basis, p, x); });
    const Mat xi = random_tangent(phi, rng);
    const Mat rhs = tangent_matrix(phi, xi);
    const TangentOperators ops(model, gs.orbitals);
    const OrbitalMetric om = OrbitalMetric::kinetic(ops);
    LinearSolveOptions lo;
    lo.tolerance = 1e-13;
    const TangentSet sol = solve_omega_plus_k(ops, om, {xi}, lo);
    note(d.solve, tangent_matrix(phi, sol.xi), tangent_solve(s, p, rhs));
  }
}

// Orbital-form operators against dense super-operators, at the ground states
// of the small fixture models and at random points of the manifold.
inline Discrepancies check_against_dense(std::uint64_t seed = 11) {
  std::mt19937_64 rng(seed);
  Discrepancies d;
  check_model(fixtures::small_model(), fixtures::kSmallEcut, rng, d);
  check_model(fixtures::small_hartree_model(), fixtures::kSmallHartreeEcut, rng, d);
  return d;
}

}  // namespace oracle
