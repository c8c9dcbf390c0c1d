#include "pwap/estimators.hpp"

#include <cmath>
#include <stdexcept>

#include "pwap/errors.hpp"
#include "pwap/lobpcg.hpp"

namespace pwap {

FrequencySplit::FrequencySplit(std::shared_ptr<const PlaneWaveBasis> fine, double ecut)
    : fine_(std::move(fine)), ecut_(ecut) {
  if (!(ecut > 0.0)) throw std::invalid_argument("coarse cutoff must be positive");
  if (ecut > fine_->ecut() * (1.0 + 1e-12))
    throw std::invalid_argument("coarse cutoff exceeds the fine cutoff");
  mask_ = coarse_mask(*fine_, ecut);
}

Eigen::VectorXd to_real_coordinates(const TangentSet& xi) {
  const Eigen::Index n = xi.xi.size();
  Eigen::VectorXd v(2 * n);
  const Eigen::Map<const Eigen::VectorXcd> flat(xi.xi.data(), n);
  v.head(n) = flat.real();
  v.tail(n) = flat.imag();
  return v;
}

TangentSet from_real_coordinates(const Eigen::VectorXd& v, Eigen::Index rows, Eigen::Index cols) {
  const Eigen::Index n = rows * cols;
  if (v.size() != 2 * n) throw std::invalid_argument("real coordinate vector has the wrong length");
  TangentSet out{Eigen::MatrixXcd(rows, cols)};
  Eigen::Map<Eigen::VectorXcd> flat(out.xi.data(), n);
  for (Eigen::Index i = 0; i < n; ++i) flat[i] = cplx(v[i], v[n + i]);
  return out;
}

namespace {

using RealMatrix = Eigen::MatrixXd;

// Lifts a tangent operator to blocks of real coordinate vectors.
BlockOperator<double> real_block(const TangentOperators& ops,
                                 std::function<TangentSet(const TangentSet&)> op) {
  const Eigen::Index rows = ops.orbitals().phi.rows();
  const Eigen::Index cols = ops.orbitals().phi.cols();
  return [rows, cols, op = std::move(op)](const RealMatrix& x) {
    RealMatrix y(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      y.col(j) = to_real_coordinates(op(from_real_coordinates(x.col(j), rows, cols)));
    return y;
  };
}

RealMatrix random_tangent_block(const TangentOperators& ops, Eigen::Index count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Eigen::Index rows = ops.orbitals().phi.rows();
  const Eigen::Index cols = ops.orbitals().phi.cols();
  RealMatrix x = detail::random_block<double>(2 * rows * cols, count, rng);
  // Bias towards smooth directions, where the extreme eigenvectors live.
  const PlaneWaveBasis& b = ops.basis();
  for (Eigen::Index j = 0; j < count; ++j) {
    TangentSet t = from_real_coordinates(x.col(j), rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) t.xi.row(r) /= 1.0 + b.g2(static_cast<std::size_t>(r));
    x.col(j) = to_real_coordinates(ops.project(t.xi));
  }
  return x;
}

double extreme_eigenvalue(const TangentOperators& ops, std::function<TangentSet(const TangentSet&)> op,
                          bool largest, const BlockOperator<double>& precondition,
                          const EstimatorOptions& options) {
  const Eigen::Index nev = 1;
  const Eigen::Index block = 4;
  BlockOperator<double> apply = real_block(ops, std::move(op));
  if (largest) {
    apply = [inner = std::move(apply)](const RealMatrix& x) { return RealMatrix(-inner(x)); };
  }
  const BlockOperator<double> project =
      real_block(ops, [&ops](const TangentSet& t) { return ops.project(t.xi); });
  const auto result = lobpcg<double>(apply, random_tangent_block(ops, block, options.seed), nev,
                                     options.eig_tolerance, options.eig_max_iterations,
                                     precondition, project, options.seed);
  if (!result.converged)
    throw ConvergenceError("tangent-space eigensolver did not converge", result.residuals[0],
                           result.iterations);
  return largest ? -result.values[0] : result.values[0];
}

BlockOperator<double> kinetic_preconditioner(const TangentOperators& ops) {
  const PlaneWaveBasis& b = ops.basis();
  const double kappa = ops.model().kinetic_scale;
  Eigen::VectorXd inv(static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < b.size(); ++i) inv[i] = 1.0 / (kappa * b.g2(i) + 1.0);
  return real_block(ops, [&ops, inv](const TangentSet& t) {
    return ops.project(inv.asDiagonal() * t.xi);
  });
}

double l2_norm(const PlaneWaveBasis& basis, const std::vector<double>& f) {
  return std::sqrt(integrate(basis, f, f));
}

std::vector<double> difference(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

}  // namespace

double smallest_hessian_eigenvalue(const TangentOperators& ops, const EstimatorOptions& options) {
  return extreme_eigenvalue(
      ops, [&ops](const TangentSet& t) { return ops.omega_plus_k(t); }, false,
      kinetic_preconditioner(ops), options);
}

double inv_jacobian_norm(const TangentOperators& ops, const OrbitalMetric* metric,
                         const EstimatorOptions& options) {
  if (!metric) {
    const double lmin = smallest_hessian_eigenvalue(ops, options);
    if (!(lmin > 0.0)) throw IndefiniteError("Omega + K is not coercive", lmin);
    return 1.0 / lmin;
  }
  LinearSolveOptions solve;
  solve.tolerance = options.solve_tolerance;
  auto op = [&ops, metric, solve](const TangentSet& t) {
    const TangentSet y = metric->apply_power(t, 0.5);
    const TangentSet z = solve_omega_plus_k(ops, *metric, y, solve);
    return metric->apply_power(z, 0.5);
  };
  return extreme_eigenvalue(ops, op, true, nullptr, options);
}

OperatorConstants operator_constants(const TangentOperators& ops, const OrbitalMetric& metric,
                                     const EstimatorOptions& options) {
  return {inv_jacobian_norm(ops, nullptr, options), inv_jacobian_norm(ops, &metric, options)};
}

BoundReport norm_bound_report(const TangentOperators& ops, const OrbitalMetric& metric,
                              const OperatorConstants& constants, const OrbitalSet* reference) {
  BoundReport b;
  const TangentSet r = ops.residual();
  b.residual_norm = norm(r);
  b.metric_residual_norm = norm(metric.apply_power(r, -0.5));
  b.bound_plain = constants.plain * b.residual_norm;
  b.bound_metric = constants.metric * b.metric_residual_norm;
  if (reference) {
    const TangentSet err = tangent_error(ops.orbitals(), *reference);
    b.error_norm = norm(err);
    b.metric_error_norm = norm(metric.apply_power(err, 0.5));
  }
  return b;
}

TangentSet schur_residual(const TangentOperators& ops, const OrbitalMetric& metric,
                          const FrequencySplit& split, double tol) {
  if (&ops.basis() != &split.fine() && ops.basis().size() != split.fine().size())
    throw std::invalid_argument("schur_residual: operators and split use different bases");
  const double outside = split.high({ops.orbitals().phi}).xi.norm();
  if (outside > 1e-10)
    throw std::invalid_argument("schur_residual: orbitals must be supported on the coarse sphere");

  const TangentSet r = ops.residual();
  // On high frequencies P_perp acts as the identity, so M22 = T there.
  const TangentSet y2 = split.high(metric.apply_t_inverse(split.high(r)));
  TangentSet rhs1 = split.low(r);
  rhs1.xi -= split.low(ops.omega_plus_k(y2)).xi;

  LinearSolveOptions solve;
  solve.tolerance = tol;
  solve.restrict_mask = split.mask();
  const TangentSet y1 = solve_omega_plus_k(ops, metric, rhs1, solve);
  return {y1.xi + y2.xi};
}

ErrorReport qoi_error_estimates(const MeanFieldModel& model, const FrequencySplit& split,
                                const OrbitalSet& coarse, const OrbitalSet* reference,
                                const EstimatorOptions& options) {
  const OrbitalSet phi = lift(coarse, split.fine_ptr());
  const PlaneWaveBasis& basis = split.fine();
  const TangentOperators ops(model, phi);
  const OrbitalMetric metric = OrbitalMetric::kinetic(ops, options.metric);

  ErrorReport rep;
  rep.ecut = split.ecut();
  const TangentSet r = ops.residual();
  rep.residual_norm = norm(r);
  rep.metric_residual_norm = norm(metric.apply_power(r, -0.5));
  rep.low_frequency_residual = norm(split.low(r));

  const TangentSet x_res = metric.apply_power(r, -1.0);
  const TangentSet x_schur = schur_residual(ops, metric, split, options.solve_tolerance);
  rep.schur_norm = norm(x_schur);
  std::optional<TangentSet> x_exact;
  if (reference) {
    if (reference->basis->size() != basis.size())
      throw std::invalid_argument("reference must live on the fine basis");
    x_exact = tangent_error(phi, *reference);
    rep.error_norm = norm(*x_exact);
    rep.metric_error_norm = norm(metric.apply_power(*x_exact, 0.5));
  }

  rep.energy = energy(model, phi);
  rep.energy_estimate.residual = inner(r, x_res);
  rep.energy_estimate.schur = inner(r, x_schur);

  const auto rho = density(basis, phi.phi);
  const auto rho_res = density_response(basis, phi.phi, x_res.xi);
  const auto rho_schur = density_response(basis, phi.phi, x_schur.xi);
  rep.density_estimate.residual = l2_norm(basis, rho_res);
  rep.density_estimate.schur = l2_norm(basis, rho_schur);

  rep.forces = forces(model, phi);
  rep.dforce_residual = force_derivative(model, phi, x_res);
  rep.dforce_schur = force_derivative(model, phi, x_schur);

  if (reference) {
    rep.energy_reference = energy(model, *reference);
    rep.energy_estimate.exact = inner(r, *x_exact);
    const auto rho_ref = density(basis, reference->phi);
    const auto rho_exact = density_response(basis, phi.phi, x_exact->xi);
    const auto err = difference(rho, rho_ref);
    rep.density_error = l2_norm(basis, err);
    rep.density_estimate.exact = l2_norm(basis, rho_exact);
    rep.density_post_error.exact = l2_norm(basis, difference(err, rho_exact));
    rep.density_post_error.residual = l2_norm(basis, difference(err, rho_res));
    rep.density_post_error.schur = l2_norm(basis, difference(err, rho_schur));
    rep.forces_reference = forces(model, *reference);
    rep.dforce_exact = force_derivative(model, phi, *x_exact);
  } else {
    rep.dforce_exact = Eigen::MatrixXd::Constant(rep.forces.rows(), rep.forces.cols(),
                                                 std::numeric_limits<double>::quiet_NaN());
  }
  return rep;
}

double projected_force_operator_norm(const MeanFieldModel& model, const OrbitalSet& orbitals,
                                     std::size_t atom, int direction) {
  if (atom >= model.atoms.size()) throw std::out_of_range("atom index out of range");
  if (direction < 0 || direction >= model.lattice.dim())
    throw std::out_of_range("direction out of range");
  const PlaneWaveBasis& basis = *orbitals.basis;
  const FftGrid& grid = basis.grid();
  std::vector<cplx> coefficients(grid.size(), cplx{});
  for (std::size_t f = 0; f < grid.size(); ++f) {
    const Miller m = grid.frequency(f);
    if (!basis.in_product_box(m)) continue;
    const Eigen::Vector3d g = model.lattice.reciprocal_vector(m);
    coefficients[f] = cplx(0.0, -g[direction]) * atom_potential_coefficient(model, atom, g);
  }
  const auto dv = grid_values(basis, std::move(coefficients));
  const Eigen::MatrixXcd dv_phi = apply_local(basis, dv, orbitals.phi);
  return norm(project_tangent(orbitals, dv_phi));
}

double operator_norm_force_bound(const MeanFieldModel& model, const OrbitalSet& orbitals,
                                 std::size_t atom, int direction, double error_norm) {
  return projected_force_operator_norm(model, orbitals, atom, direction) * error_norm;
}

}  // namespace pwap
