#pragma once

#include <limits>
#include <memory>
#include <optional>

#include <Eigen/Dense>

#include "pwap/geometry.hpp"
#include "pwap/solvers.hpp"

namespace pwap {

// Coarse/fine split of a fine basis at a coarse cutoff: "1" holds plane waves
// with |G|^2/2 <= ecut, "2" the rest.
class FrequencySplit {
 public:
  FrequencySplit(std::shared_ptr<const PlaneWaveBasis> fine, double ecut);

  const PlaneWaveBasis& fine() const { return *fine_; }
  std::shared_ptr<const PlaneWaveBasis> fine_ptr() const { return fine_; }
  double ecut() const { return ecut_; }
  const Eigen::VectorXd& mask() const { return mask_; }

  TangentSet low(const TangentSet& xi) const { return {mask_.asDiagonal() * xi.xi}; }
  TangentSet high(const TangentSet& xi) const {
    return {(1.0 - mask_.array()).matrix().asDiagonal() * xi.xi};
  }

 private:
  std::shared_ptr<const PlaneWaveBasis> fine_;
  double ecut_;
  Eigen::VectorXd mask_;
};

struct EstimatorOptions {
  double solve_tolerance = 1e-10;
  double eig_tolerance = 1e-8;
  int eig_max_iterations = 500;
  std::uint64_t seed = 1;
  MetricOptions metric;
};

// Real coordinates [Re vec(Xi); Im vec(Xi)] of a tangent set. The Frobenius
// inner product is twice the Euclidean one in these coordinates.
Eigen::VectorXd to_real_coordinates(const TangentSet& xi);
TangentSet from_real_coordinates(const Eigen::VectorXd& v, Eigen::Index rows, Eigen::Index cols);

// Without a metric: 1 / lambda_min((Omega + K) on the tangent space).
// With a metric: lambda_max(M^(1/2) (Omega + K)^(-1) M^(1/2)).
double inv_jacobian_norm(const TangentOperators& ops, const OrbitalMetric* metric,
                         const EstimatorOptions& options = {});
// lambda_min of (Omega + K) on the tangent space.
double smallest_hessian_eigenvalue(const TangentOperators& ops, const EstimatorOptions& options = {});

struct OperatorConstants {
  double plain = std::numeric_limits<double>::quiet_NaN();
  double metric = std::numeric_limits<double>::quiet_NaN();
};

OperatorConstants operator_constants(const TangentOperators& ops, const OrbitalMetric& metric,
                                     const EstimatorOptions& options = {});

struct BoundReport {
  double residual_norm = 0.0;          // ||R(P)||_F
  double metric_residual_norm = 0.0;   // ||M^(-1/2) R(P)||_F
  double bound_plain = 0.0;            // c_plain ||R||_F, bounds ||Pi_P(P - P*)||_F
  double bound_metric = 0.0;           // c_metric ||M^(-1/2) R||_F, bounds ||M^(1/2) Pi_P(P - P*)||_F
  double error_norm = std::numeric_limits<double>::quiet_NaN();         // ||Pi_P(P - P*)||_F
  double metric_error_norm = std::numeric_limits<double>::quiet_NaN();  // ||M^(1/2) Pi_P(P - P*)||_F
};

// `ops` and `metric` live on the fine basis of the split; the reference, when
// given, is in the same basis.
BoundReport norm_bound_report(const TangentOperators& ops, const OrbitalMetric& metric,
                              const OperatorConstants& constants,
                              const OrbitalSet* reference = nullptr);

// R_Schur: component 2 is M22^(-1) R2, component 1 solves
// (Omega + K)11 Y1 = R1 - (Omega + K)12 M22^(-1) R2.
TangentSet schur_residual(const TangentOperators& ops, const OrbitalMetric& metric,
                          const FrequencySplit& split, double tol);

struct QoiEstimate {
  double exact = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
  double schur = std::numeric_limits<double>::quiet_NaN();
};

struct ErrorReport {
  double ecut = 0.0;
  double energy = 0.0;
  double energy_reference = std::numeric_limits<double>::quiet_NaN();
  // dE(P).X = <R(P), X>_F
  QoiEstimate energy_estimate;
  // ||rho(P) - rho*||_L2 and ||rho_X||_L2
  double density_error = std::numeric_limits<double>::quiet_NaN();
  QoiEstimate density_estimate;
  // ||rho(P) - rho_X - rho*||_L2
  QoiEstimate density_post_error;
  Eigen::MatrixXd forces;
  Eigen::MatrixXd forces_reference;
  Eigen::MatrixXd dforce_exact, dforce_residual, dforce_schur;

  double residual_norm = 0.0;
  double metric_residual_norm = 0.0;
  double error_norm = std::numeric_limits<double>::quiet_NaN();
  double metric_error_norm = std::numeric_limits<double>::quiet_NaN();
  double schur_norm = 0.0;
  double low_frequency_residual = 0.0;  // ||Pi_1 R(P)||_F
  int schur_iterations = 0;

  bool has_reference() const { return forces_reference.size() > 0; }
};

// Phi is a variational solution on split.ecut(); it is lifted to the fine
// basis. The reference (fine basis) is optional.
ErrorReport qoi_error_estimates(const MeanFieldModel& model, const FrequencySplit& split,
                                const OrbitalSet& coarse, const OrbitalSet* reference,
                                const EstimatorOptions& options = {});

// ||Pi_P dV/dX_{j,b}||_F = sqrt(2) ||P_perp (dV Phi)||_F
double projected_force_operator_norm(const MeanFieldModel& model, const OrbitalSet& orbitals,
                                     std::size_t atom, int direction);
// ||Pi_P dV/dX_{j,b}||_F * error_norm
double operator_norm_force_bound(const MeanFieldModel& model, const OrbitalSet& orbitals,
                                 std::size_t atom, int direction, double error_norm);

}  // namespace pwap
