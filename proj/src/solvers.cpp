#include "pwap/solvers.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "pwap/errors.hpp"

namespace pwap {

void ScfOptions::validate() const {
  if (!(mixing > 0.0 && mixing <= 1.0)) throw std::invalid_argument("mixing must lie in (0, 1]");
  if (!(tolerance > 0.0)) throw std::invalid_argument("scf tolerance must be positive");
  if (eig_tolerance < 0.0) throw std::invalid_argument("eigensolver tolerance must be nonnegative");
  if (max_iterations < 1 || eig_max_iterations < 1)
    throw std::invalid_argument("iteration limits must be positive");
}

Eigen::MatrixXcd initial_guess(const PlaneWaveBasis& basis, Eigen::Index n_cols, std::uint64_t seed) {
  const auto nb = static_cast<Eigen::Index>(basis.size());
  if (n_cols > nb) throw std::invalid_argument("more guess vectors than plane waves");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(nb, n_cols);
  for (Eigen::Index j = 0; j < n_cols; ++j) {
    x(j, j) = 1.0;
    for (Eigen::Index i = 0; i < nb; ++i) {
      const double re = normal(rng);
      x(i, j) += 1e-2 * cplx(re, normal(rng)) / (1.0 + basis.g2(static_cast<std::size_t>(i)));
    }
  }
  return x;
}

EigenResult<cplx> lowest_eigenpairs(const Hamiltonian& h, int nev, double tol, int max_iterations,
                                    const Eigen::MatrixXcd& guess, std::uint64_t seed) {
  const Eigen::VectorXd inv = (h.kinetic().array() + 1.0).inverse();
  BlockOperator<cplx> apply = [&](const Eigen::MatrixXcd& x) { return h.apply(x); };
  BlockOperator<cplx> precondition = [&](const Eigen::MatrixXcd& x) {
    return Eigen::MatrixXcd(inv.asDiagonal() * x);
  };
  return lobpcg<cplx>(apply, guess, nev, tol, max_iterations, precondition, nullptr, seed);
}

GroundState scf(const MeanFieldModel& model, std::shared_ptr<const PlaneWaveBasis> basis,
                const ScfOptions& options) {
  model.validate();
  options.validate();
  const int n = model.n_electrons;
  const auto nb = static_cast<Eigen::Index>(basis->size());
  if (n > nb) throw std::invalid_argument("more electrons than plane waves");
  const bool linear = model.alpha == 0.0 && !model.hartree;
  const double eig_floor =
      options.eig_tolerance > 0.0 ? options.eig_tolerance : 0.1 * options.tolerance / std::sqrt(2.0 * n);

  GroundState gs;
  SolveReport& report = gs.report;
  Eigen::MatrixXcd block = initial_guess(*basis, std::min<Eigen::Index>(nb, n + 3), options.seed);
  std::vector<double> rho_in;
  double previous = std::numeric_limits<double>::infinity();

  for (int it = 1; it <= options.max_iterations; ++it) {
    const Hamiltonian h(model, basis, rho_in);
    const double eig_tol = linear ? eig_floor : std::max(eig_floor, std::min(1e-3, 0.01 * previous));
    const auto eig = lowest_eigenpairs(h, n, eig_tol, options.eig_max_iterations, block,
                                       options.seed + static_cast<std::uint64_t>(it));
    report.eigensolver_iterations.push_back(eig.iterations);
    block = eig.vectors;
    OrbitalSet orbitals{basis, eig.vectors.leftCols(n)};
    gs.eigenvalues = eig.values.head(n);

    const TangentOperators ops(model, orbitals);
    const double res = norm(ops.residual());
    report.iterations = it;
    report.residual_norm = res;
    report.residual_history.push_back(res);
    report.energy_history.push_back(energy(model, orbitals));
    gs.orbitals = std::move(orbitals);
    gs.energy = report.energy_history.back();
    if (!std::isfinite(res)) {
      report.message = "residual became non-finite";
      return gs;
    }
    if (res <= options.tolerance) {
      report.converged = true;
      report.message = "converged";
      // Report eigenvalues of the self-consistent Hamiltonian.
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> lam(ops.lambda());
      gs.eigenvalues = lam.eigenvalues();
      return gs;
    }
    if (linear && !eig.converged) {
      report.message = "eigensolver did not converge";
      return gs;
    }
    if (rho_in.empty()) {
      rho_in = ops.rho();
    } else {
      const auto& rho_out = ops.rho();
      for (std::size_t k = 0; k < rho_in.size(); ++k)
        rho_in[k] += options.mixing * (rho_out[k] - rho_in[k]);
    }
    previous = res;
  }
  report.message = "maximum number of SCF iterations reached";
  return gs;
}

Eigen::VectorXd coarse_mask(const PlaneWaveBasis& basis, double ecut) {
  Eigen::VectorXd mask(static_cast<Eigen::Index>(basis.size()));
  const double limit = ecut * (1.0 + 1e-12);
  for (std::size_t i = 0; i < basis.size(); ++i) mask[i] = 0.5 * basis.g2(i) <= limit ? 1.0 : 0.0;
  return mask;
}

TangentSet solve_omega_plus_k(const TangentOperators& ops, const OrbitalMetric& metric,
                              const TangentSet& rhs_in, const LinearSolveOptions& options,
                              LinearSolveReport* report) {
  const auto& mask = options.restrict_mask;
  auto restrict = [&](TangentSet t) {
    if (mask) t.xi = mask->asDiagonal() * t.xi;
    return t;
  };
  if (mask) {
    const double outside = ((1.0 - mask->array()).matrix().asDiagonal() * ops.orbitals().phi).norm();
    if (outside > 1e-10)
      throw std::invalid_argument("restricted solve needs orbitals supported inside the mask");
  }
  check_gauge(ops.orbitals(), rhs_in);
  const TangentSet rhs = restrict(rhs_in);
  auto apply = [&](const TangentSet& x) { return restrict(ops.omega_plus_k(x)); };
  auto precondition = [&](const TangentSet& r) { return restrict(metric.apply_power(r, -1.0)); };

  const double bnorm = norm(rhs);
  TangentSet x{Eigen::MatrixXcd::Zero(rhs.xi.rows(), rhs.xi.cols())};
  if (report) *report = {};
  if (bnorm == 0.0) return x;

  TangentSet r = rhs;
  int total = 0;
  for (int restart = 0; restart < 4; ++restart) {
    TangentSet z = precondition(r);
    TangentSet p = z;
    double rz = inner(r, z);
    while (norm(r) > options.tolerance * bnorm) {
      if (total >= options.max_iterations)
        throw ConvergenceError("(Omega + K) solve did not converge", norm(r) / bnorm, total);
      const TangentSet ap = apply(p);
      const double pap = inner(p, ap);
      const double pp = inner(p, p);
      if (!(pap > 0.0)) throw IndefiniteError("Omega + K is not positive on the tangent space", pap / pp);
      const double step = rz / pap;
      x.xi += step * p.xi;
      r = ops.project(r.xi - step * ap.xi);
      z = precondition(r);
      const double rz_new = inner(r, z);
      p.xi = z.xi + (rz_new / rz) * p.xi;
      rz = rz_new;
      ++total;
    }
    // Guard against drift of the recursively updated residual.
    r = ops.project(rhs.xi - apply(x).xi);
    if (norm(r) <= options.tolerance * bnorm) break;
  }
  const double rel = norm(r) / bnorm;
  if (report) *report = {total, rel};
  if (rel > options.tolerance)
    throw ConvergenceError("(Omega + K) solve stagnated", rel, total);
  return x;
}

TangentSet solve_omega_plus_k(const MeanFieldModel& model, const OrbitalSet& orbitals,
                              const TangentSet& rhs, double tol,
                              std::optional<double> restrict_to_coarse) {
  const TangentOperators ops(model, orbitals);
  const OrbitalMetric metric = OrbitalMetric::kinetic(ops);
  LinearSolveOptions options;
  options.tolerance = tol;
  if (restrict_to_coarse) options.restrict_mask = coarse_mask(ops.basis(), *restrict_to_coarse);
  return solve_omega_plus_k(ops, metric, rhs, options);
}

OrbitalSet lift(const OrbitalSet& orbitals, std::shared_ptr<const PlaneWaveBasis> target) {
  const PlaneWaveBasis& from = *orbitals.basis;
  Eigen::MatrixXcd phi = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(target->size()),
                                                orbitals.phi.cols());
  for (std::size_t i = 0; i < from.size(); ++i) {
    const auto j = target->find(from.miller(i));
    if (!j) throw std::invalid_argument("lift: target basis does not contain the source basis");
    phi.row(static_cast<Eigen::Index>(*j)) = orbitals.phi.row(static_cast<Eigen::Index>(i));
  }
  return {std::move(target), std::move(phi)};
}

OrbitalSet restrict_to(const OrbitalSet& orbitals, std::shared_ptr<const PlaneWaveBasis> target) {
  const PlaneWaveBasis& from = *orbitals.basis;
  Eigen::MatrixXcd phi = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(target->size()),
                                                orbitals.phi.cols());
  for (std::size_t j = 0; j < target->size(); ++j) {
    const auto i = from.find(target->miller(j));
    if (i) phi.row(static_cast<Eigen::Index>(j)) = orbitals.phi.row(static_cast<Eigen::Index>(*i));
  }
  return {std::move(target), std::move(phi)};
}

Eigen::MatrixXcd retract(const Eigen::MatrixXcd& y) {
  Eigen::MatrixXcd s = y.adjoint() * y;
  s = (0.5 * (s + s.adjoint())).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(s);
  if (eig.eigenvalues().minCoeff() <= 0.0) throw std::invalid_argument("retract: rank-deficient block");
  const Eigen::VectorXd inv_sqrt = eig.eigenvalues().array().rsqrt();
  return y * (eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().adjoint());
}

NewtonResult newton_step(const MeanFieldModel& model, std::shared_ptr<const PlaneWaveBasis> fine,
                         const OrbitalSet& coarse, double tol) {
  OrbitalSet phi = lift(coarse, std::move(fine));
  const TangentOperators ops(model, phi);
  const OrbitalMetric metric = OrbitalMetric::kinetic(ops);
  LinearSolveOptions options;
  options.tolerance = tol;
  NewtonResult out;
  out.step = solve_omega_plus_k(ops, metric, ops.residual(), options, &out.solve);
  out.orbitals = {phi.basis, retract(phi.phi - out.step.xi)};
  return out;
}

}  // namespace pwap
