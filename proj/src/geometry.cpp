#include "pwap/geometry.hpp"

#include <cmath>
#include <cstdio>

#include "pwap/errors.hpp"
#include "pwap/kernels.hpp"
#include "pwap/parallel.hpp"

namespace pwap {

TangentSet project_tangent(const OrbitalSet& orbitals, const Eigen::MatrixXcd& raw) {
  const Eigen::MatrixXcd& phi = orbitals.phi;
  return {raw - phi * (phi.adjoint() * raw)};
}

void check_gauge(const OrbitalSet& orbitals, const TangentSet& xi) {
  if (xi.xi.rows() != orbitals.phi.rows() || xi.xi.cols() != orbitals.phi.cols())
    throw std::invalid_argument("tangent set shape does not match orbitals");
  const double violation = (orbitals.phi.adjoint() * xi.xi).norm();
  if (violation > 1e-8 * std::max(1.0, xi.xi.norm()))
    throw GaugeError("tangent set violates Phi^* Xi = 0 (" + std::to_string(violation) + ")");
}

TangentOperators::TangentOperators(const MeanFieldModel& model, OrbitalSet orbitals)
    : model_(model),
      orbitals_(std::move(orbitals)),
      rho_(density(*orbitals_.basis, orbitals_.phi)),
      hamiltonian_(model_, orbitals_.basis, rho_) {
  h_phi_ = hamiltonian_.apply(orbitals_.phi);
  lambda_ = orbitals_.phi.adjoint() * h_phi_;
  lambda_ = 0.5 * (lambda_ + lambda_.adjoint()).eval();
  phi_real_ = real_space_orbitals(*orbitals_.basis, orbitals_.phi);
}

TangentSet TangentOperators::residual() const { return project(h_phi_); }

TangentSet TangentOperators::omega(const TangentSet& xi) const {
  check_gauge(orbitals_, xi);
  return project(hamiltonian_.apply(xi.xi) - xi.xi * lambda_);
}

std::vector<double> TangentOperators::delta_potential(const TangentSet& xi) const {
  const PlaneWaveBasis& b = basis();
  const auto xi_real = real_space_orbitals(b, xi.xi);
  std::vector<double> rho_x(b.grid().size(), 0.0);
  for (std::size_t i = 0; i < xi_real.size(); ++i)
    kernels::add_re_conj_mul(2.0, phi_real_[i], xi_real[i], rho_x);
  std::vector<double> dv(rho_x.size(), 0.0);
  if (model_.hartree) dv = hartree_potential(b, rho_x);
  for (std::size_t k = 0; k < dv.size(); ++k) dv[k] += model_.alpha * rho_x[k];
  return dv;
}

TangentSet TangentOperators::k(const TangentSet& xi) const {
  check_gauge(orbitals_, xi);
  if (is_linear()) return {Eigen::MatrixXcd::Zero(xi.xi.rows(), xi.xi.cols())};
  const auto dv = delta_potential(xi);
  Eigen::MatrixXcd out(xi.xi.rows(), xi.xi.cols());
  parallel_for(phi_real_.size(), [&](std::size_t i) {
    out.col(static_cast<Eigen::Index>(i)) = apply_local(basis(), dv, phi_real_[i]);
  });
  return project(out);
}

TangentSet TangentOperators::omega_plus_k(const TangentSet& xi) const {
  TangentSet a = omega(xi);
  if (!is_linear()) a.xi += k(xi).xi;
  return a;
}

TangentSet residual(const MeanFieldModel& model, const OrbitalSet& orbitals) {
  return TangentOperators(model, orbitals).residual();
}

TangentSet apply_omega(const MeanFieldModel& model, const OrbitalSet& orbitals, const TangentSet& xi) {
  return TangentOperators(model, orbitals).omega(xi);
}

TangentSet apply_k(const MeanFieldModel& model, const OrbitalSet& orbitals, const TangentSet& xi) {
  return TangentOperators(model, orbitals).k(xi);
}

TangentSet tangent_error(const OrbitalSet& orbitals, const OrbitalSet& reference) {
  if (orbitals.phi.rows() != reference.phi.rows() || orbitals.phi.cols() != reference.phi.cols())
    throw std::invalid_argument("tangent_error: orbital sets live in different spaces");
  const Eigen::MatrixXcd raw = -reference.phi * (reference.phi.adjoint() * orbitals.phi);
  return project_tangent(orbitals, raw);
}

// ---------------------------------------------------------------- metric

OrbitalMetric::OrbitalMetric(const OrbitalSet& orbitals, Eigen::VectorXd diagonal,
                             Eigen::VectorXd shifts, Eigen::MatrixXcd gauge, Options options)
    : orbitals_(orbitals),
      diagonal_(std::move(diagonal)),
      shifts_(std::move(shifts)),
      gauge_(std::move(gauge)),
      options_(options) {
  if (static_cast<std::size_t>(diagonal_.size()) != orbitals_.basis->size())
    throw std::invalid_argument("metric diagonal does not match basis");
  if (shifts_.size() != orbitals_.n_orbitals())
    throw std::invalid_argument("one metric shift per orbital is required");
  for (double t : shifts_)
    if (!(t > 0.0)) throw std::invalid_argument("metric shifts must be positive");
}

OrbitalMetric OrbitalMetric::kinetic(const TangentOperators& ops, Options options, double floor) {
  const OrbitalSet& orb = ops.orbitals();
  const PlaneWaveBasis& b = ops.basis();
  const double kappa = ops.model().kinetic_scale;
  Eigen::VectorXd diagonal(static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < b.size(); ++i) diagonal[i] = kappa * b.g2(i);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(ops.lambda());
  const Eigen::MatrixXcd v = eig.eigenvectors();
  const Eigen::VectorXd lam = eig.eigenvalues();
  const Eigen::MatrixXcd canonical = orb.phi * v;
  const Eigen::Index n = orb.n_orbitals();
  Eigen::VectorXd t(n);
  for (Eigen::Index i = 0; i < n; ++i)
    t[i] = diagonal.dot(canonical.col(i).cwiseAbs2());

  // Within a degenerate cluster the canonical orbitals are arbitrary, so only
  // the cluster average is well defined.
  for (Eigen::Index begin = 0; begin < n;) {
    Eigen::Index end = begin + 1;
    while (end < n && lam[end] - lam[begin] <= 1e-8 * std::max(1.0, std::abs(lam[begin]))) ++end;
    const double mean = t.segment(begin, end - begin).mean();
    t.segment(begin, end - begin).setConstant(mean);
    begin = end;
  }
  for (Eigen::Index i = 0; i < n; ++i) t[i] = std::max(t[i], floor);
  return OrbitalMetric(orb, std::move(diagonal), std::move(t), v, options);
}

OrbitalMetric OrbitalMetric::kinetic(const MeanFieldModel& model, const OrbitalSet& orbitals,
                                     Options options, double floor) {
  return kinetic(TangentOperators(model, orbitals), options, floor);
}

OrbitalMetric OrbitalMetric::explicit_shift(const OrbitalSet& orbitals, Eigen::VectorXd diagonal,
                                            Eigen::VectorXd shifts, Options options) {
  const Eigen::Index n = orbitals.n_orbitals();
  return OrbitalMetric(orbitals, std::move(diagonal), std::move(shifts),
                       Eigen::MatrixXcd::Identity(n, n), options);
}

Eigen::VectorXcd OrbitalMetric::project_column(const Eigen::VectorXcd& v) const {
  return v - orbitals_.phi * (orbitals_.phi.adjoint() * v);
}

Eigen::VectorXcd OrbitalMetric::apply_column(const Eigen::VectorXcd& v, double t, double s) const {
  const Eigen::VectorXd half = (diagonal_.array() + t).sqrt();
  if (s == 0.5) return project_column(half.asDiagonal() * project_column(v));
  if (s == 1.0) {
    Eigen::VectorXcd w = project_column(half.asDiagonal() * project_column(v));
    return project_column(half.asDiagonal() * w);
  }
  if (s == -0.5 || s == -1.0) return solve_column(v, t, -s);
  throw std::invalid_argument("metric power must be one of -1, -1/2, 1/2, 1");
}

// Preconditioned CG for (M_i^s) y = b on Ran(P)^perp, s in {1/2, 1}, with
// preconditioner P_perp T_i^(-s) P_perp.
Eigen::VectorXcd OrbitalMetric::solve_column(const Eigen::VectorXcd& b_raw, double t, double s) const {
  const Eigen::VectorXcd b = project_column(b_raw);
  const double bnorm = b.norm();
  if (bnorm == 0.0) return Eigen::VectorXcd::Zero(b.size());
  const Eigen::VectorXd inv = (diagonal_.array() + t).pow(-s);
  auto precondition = [&](const Eigen::VectorXcd& r) {
    return project_column(inv.asDiagonal() * r);
  };
  Eigen::VectorXcd x = precondition(b);
  Eigen::VectorXcd r = b - apply_column(x, t, s);
  Eigen::VectorXcd z = precondition(r);
  Eigen::VectorXcd p = z;
  double rz = r.dot(z).real();
  int it = 0;
  for (; it < options_.max_iterations; ++it) {
    if (r.norm() <= options_.tolerance * bnorm) return x;
    const Eigen::VectorXcd ap = apply_column(p, t, s);
    const double pap = p.dot(ap).real();
    if (!(pap > 0.0)) break;
    const double step = rz / pap;
    x += step * p;
    // Keep rounding from leaking into Ran(P), where it would never decay.
    r = project_column(r - step * ap);
    z = precondition(r);
    const double rz_new = r.dot(z).real();
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  const double rel = r.norm() / bnorm;
  if (rel <= options_.tolerance) return x;
  throw ConvergenceError("metric inverse did not converge", rel, it);
}

TangentSet OrbitalMetric::apply_power(const TangentSet& xi, double s) const {
  check_gauge(orbitals_, xi);
  const Eigen::MatrixXcd rotated = xi.xi * gauge_;
  Eigen::MatrixXcd out(rotated.rows(), rotated.cols());
  parallel_for(static_cast<std::size_t>(rotated.cols()), [&](std::size_t i) {
    const auto c = static_cast<Eigen::Index>(i);
    out.col(c) = apply_column(rotated.col(c), shifts_[c], s);
  });
  return {out * gauge_.adjoint()};
}

TangentSet OrbitalMetric::apply_t_inverse(const TangentSet& xi) const {
  const Eigen::MatrixXcd rotated = xi.xi * gauge_;
  Eigen::MatrixXcd out(rotated.rows(), rotated.cols());
  for (Eigen::Index c = 0; c < rotated.cols(); ++c)
    out.col(c) = (diagonal_.array() + shifts_[c]).inverse().matrix().asDiagonal() * rotated.col(c);
  return {out * gauge_.adjoint()};
}

}  // namespace pwap
