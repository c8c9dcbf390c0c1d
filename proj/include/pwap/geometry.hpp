#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "pwap/model.hpp"
#include "pwap/orbitals.hpp"

namespace pwap {

// xi_i <- (1 - Phi Phi^*) raw_i
TangentSet project_tangent(const OrbitalSet& orbitals, const Eigen::MatrixXcd& raw);

// Throws GaugeError when ||Phi^* Xi||_F > 1e-8 max(1, ||Xi||_F).
void check_gauge(const OrbitalSet& orbitals, const TangentSet& xi);

// Everything the tangent-space operators need at a fixed point P = Phi Phi^*:
// H(P), H(P) Phi, Lambda = Phi^* H Phi and the orbitals on the grid.
class TangentOperators {
 public:
  TangentOperators(const MeanFieldModel& model, OrbitalSet orbitals);

  const MeanFieldModel& model() const { return model_; }
  const OrbitalSet& orbitals() const { return orbitals_; }
  const PlaneWaveBasis& basis() const { return *orbitals_.basis; }
  const Hamiltonian& hamiltonian() const { return hamiltonian_; }
  const Eigen::MatrixXcd& h_phi() const { return h_phi_; }
  const Eigen::MatrixXcd& lambda() const { return lambda_; }
  const std::vector<double>& rho() const { return rho_; }

  TangentSet project(const Eigen::MatrixXcd& raw) const { return project_tangent(orbitals_, raw); }
  // (r_1 | ... | r_Nel) = P_perp H(P) Phi
  TangentSet residual() const;
  // P_perp (H Xi - Xi Lambda)
  TangentSet omega(const TangentSet& xi) const;
  // P_perp (dH phi_i) with dH = [V_H(rho_X)] + alpha rho_X
  TangentSet k(const TangentSet& xi) const;
  TangentSet omega_plus_k(const TangentSet& xi) const;
  // Real-space dH for a tangent direction.
  std::vector<double> delta_potential(const TangentSet& xi) const;
  bool is_linear() const { return model_.alpha == 0.0 && !model_.hartree; }

 private:
  MeanFieldModel model_;
  OrbitalSet orbitals_;
  std::vector<double> rho_;
  Hamiltonian hamiltonian_;
  Eigen::MatrixXcd h_phi_;
  Eigen::MatrixXcd lambda_;
  std::vector<std::vector<cplx>> phi_real_;
};

TangentSet residual(const MeanFieldModel& model, const OrbitalSet& orbitals);
TangentSet apply_omega(const MeanFieldModel& model, const OrbitalSet& orbitals, const TangentSet& xi);
TangentSet apply_k(const MeanFieldModel& model, const OrbitalSet& orbitals, const TangentSet& xi);

// Orbital form of Pi_P(P - P_ref): -P_perp Phi_ref (Phi_ref^* Phi). Both sets
// must live in the same basis.
TangentSet tangent_error(const OrbitalSet& orbitals, const OrbitalSet& reference);

struct MetricOptions {
  double tolerance = 1e-12;
  int max_iterations = 500;
};

// Metric M_i = P_perp T_i^(1/2) P_perp T_i^(1/2) P_perp with T_i = diag(d) + t_i.
// Columns are acted on in the eigenbasis of Lambda = Phi^* H Phi so that the
// result does not depend on the orbital gauge.
class OrbitalMetric {
 public:
  using Options = MetricOptions;

  // T_i = kinetic_scale |G|^2 + t_i, t_i = max(kinetic_scale ||grad phi_i||^2, floor)
  // with phi_i the canonical orbitals; shifts are averaged over degenerate
  // eigenvalue clusters of Lambda.
  static OrbitalMetric kinetic(const TangentOperators& ops, Options options = {},
                               double floor = 1e-3);
  static OrbitalMetric kinetic(const MeanFieldModel& model, const OrbitalSet& orbitals,
                               Options options = {}, double floor = 1e-3);
  // Fixed diagonal and shifts, acting column by column in the given gauge.
  static OrbitalMetric explicit_shift(const OrbitalSet& orbitals, Eigen::VectorXd diagonal,
                                      Eigen::VectorXd shifts, Options options = {});

  // s in {-1, -1/2, 1/2, 1}. Negative powers run PCG on Ran(P)^perp.
  TangentSet apply_power(const TangentSet& xi, double s) const;
  // Column-wise T_i^(-1) without projections. Exact M^(-1) on components
  // orthogonal to the support of Phi.
  TangentSet apply_t_inverse(const TangentSet& xi) const;

  const Eigen::VectorXd& shifts() const { return shifts_; }
  const Eigen::MatrixXcd& gauge() const { return gauge_; }

 private:
  OrbitalMetric(const OrbitalSet& orbitals, Eigen::VectorXd diagonal, Eigen::VectorXd shifts,
                Eigen::MatrixXcd gauge, Options options);
  Eigen::VectorXcd project_column(const Eigen::VectorXcd& v) const;
  Eigen::VectorXcd apply_column(const Eigen::VectorXcd& v, double t, double s) const;
  Eigen::VectorXcd solve_column(const Eigen::VectorXcd& b, double t, double s) const;

  OrbitalSet orbitals_;
  Eigen::VectorXd diagonal_;
  Eigen::VectorXd shifts_;
  Eigen::MatrixXcd gauge_;
  Options options_;
};

}  // namespace pwap
