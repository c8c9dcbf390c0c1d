#include "pwap/gp_appendix.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "pwap/errors.hpp"
#include "pwap/parallel.hpp"

namespace pwap {

MeanFieldModel gp_model(double amplitude) {
  MeanFieldModel m;
  m.lattice = Lattice::cubic(1, 2.0 * std::numbers::pi);
  m.alpha = 1.0;
  m.kinetic_scale = 1.0;
  m.n_electrons = 1;
  if (amplitude != 0.0) m.cosines.push_back({Miller{1, 0, 0}, amplitude});
  return m;
}

GpState gp_ground_state(double amplitude, double n, const ScfOptions& options) {
  const MeanFieldModel model = gp_model(amplitude);
  auto basis = std::make_shared<const PlaneWaveBasis>(model.lattice, n);
  GroundState gs = scf(model, basis, options);
  if (!gs.report.converged)
    throw ConvergenceError("GP ground state did not converge", gs.report.residual_norm,
                           gs.report.iterations);
  Eigen::MatrixXcd phi = gs.orbitals.phi;
  const auto zero = basis->find(Miller{0, 0, 0});
  const cplx c0 = phi(static_cast<Eigen::Index>(*zero), 0);
  if (std::abs(c0) > 0.0) phi *= std::conj(c0) / std::abs(c0);
  GpState st;
  st.orbitals = {basis, std::move(phi)};
  st.lambda = gs.eigenvalues[0];
  st.report = gs.report;
  return st;
}

namespace {

// c(G) <- (c(G) + conj(c(-G))) / 2: projection onto real functions.
void make_real(const PlaneWaveBasis& basis, Eigen::MatrixXcd& xi) {
  Eigen::MatrixXcd out(xi.rows(), xi.cols());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const Miller& m = basis.miller(i);
    const auto j = basis.find(Miller{-m[0], -m[1], -m[2]});
    const auto r = static_cast<Eigen::Index>(i);
    out.row(r) = 0.5 * (xi.row(r) + xi.row(static_cast<Eigen::Index>(*j)).conjugate());
  }
  xi = std::move(out);
}

}  // namespace

GpPoint difference_operator_norm(double amplitude, double n, double reference,
                                 const GpOptions& options) {
  if (!(reference > n)) throw std::invalid_argument("reference cutoff must exceed the cutoff");
  const MeanFieldModel model = gp_model(amplitude);
  const GpState st = gp_ground_state(amplitude, n, options.scf);
  auto fine = std::make_shared<const PlaneWaveBasis>(model.lattice, reference);
  const OrbitalSet phi = lift(st.orbitals, fine);
  const TangentOperators ops(model, phi);

  Eigen::VectorXd diagonal(static_cast<Eigen::Index>(fine->size()));
  for (std::size_t i = 0; i < fine->size(); ++i) diagonal[i] = fine->g2(i);
  const OrbitalMetric metric =
      OrbitalMetric::explicit_shift(phi, diagonal, Eigen::VectorXd::Ones(1));
  const Eigen::VectorXd high = (1.0 - coarse_mask(*fine, n).array()).matrix();

  LinearSolveOptions solve;
  solve.tolerance = options.solve_tolerance;
  // (B - I) v with B = M^(1/2) (Omega + K)^(-1) M^(1/2)
  auto shifted = [&](const TangentSet& v) {
    const TangentSet y = metric.apply_power(v, 0.5);
    const TangentSet z = solve_omega_plus_k(ops, metric, y, solve);
    TangentSet out = metric.apply_power(z, 0.5);
    out.xi -= v.xi;
    return out;
  };

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXcd v(static_cast<Eigen::Index>(fine->size()), 1);
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    const double re = normal(rng);
    v(i, 0) = cplx(re, normal(rng)) / (1.0 + fine->g2(static_cast<std::size_t>(i)));
  }
  v = high.asDiagonal() * v;
  make_real(*fine, v);
  v /= v.norm();

  GpPoint pt;
  pt.n = n;
  pt.lambda = st.lambda;
  double previous = 0.0;
  for (int it = 1; it <= options.power_max_iterations; ++it) {
    // Power iteration on D^* D = Pi_2 (B - I)^2 Pi_2 over real functions.
    const TangentSet d = shifted({v});
    const double rq = d.xi.squaredNorm();
    Eigen::MatrixXcd w = high.asDiagonal() * shifted(d).xi;
    make_real(*fine, w);
    pt.norm = std::sqrt(rq);
    pt.power_iterations = it;
    if (it > 1 && std::abs(rq - previous) <= options.power_tolerance * rq) return pt;
    previous = rq;
    const double wn = w.norm();
    if (wn == 0.0) return pt;
    v = w / wn;
  }
  throw ConvergenceError("power iteration did not converge", std::abs(previous - pt.norm * pt.norm),
                         options.power_max_iterations);
}

GpVerification verify_proposition(double amplitude, std::vector<double> cutoffs,
                                  const GpOptions& options) {
  if (cutoffs.empty()) throw std::invalid_argument("cutoff list is empty");
  for (std::size_t i = 1; i < cutoffs.size(); ++i)
    if (!(cutoffs[i] > cutoffs[i - 1])) throw std::invalid_argument("cutoffs must increase");
  GpVerification out;
  out.reference_cutoff = options.reference_factor * cutoffs.back();
  out.points.resize(cutoffs.size());
  parallel_for(cutoffs.size(), [&](std::size_t i) {
    out.points[i] = difference_operator_norm(amplitude, cutoffs[i], out.reference_cutoff, options);
  });
  if (cutoffs.size() < 2) {
    out.warning = "fewer than two cutoffs: decay fit skipped";
    return out;
  }
  std::vector<double> x, y;
  for (const auto& p : out.points) {
    x.push_back(1.0 / std::sqrt(1.0 + 2.0 * p.n));
    y.push_back(p.norm);
  }
  const auto [slope, intercept] = loglog_fit(x, y);
  out.slope = slope;
  out.prefactor = std::exp(intercept);
  out.fitted = true;
  for (std::size_t i = 0; i < x.size(); ++i) out.points[i].bound_fit = out.prefactor * std::pow(x[i], slope);
  return out;
}

double gp_constant_norm(double n) {
  int k = 0;
  while (0.5 * k * k <= n * (1.0 + 1e-12)) ++k;
  const double inv_pi = 1.0 / std::numbers::pi;
  return (1.0 - inv_pi) / (k * k + inv_pi);
}

std::pair<double, double> loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit needs two points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {slope, (sy - slope * sx) / n};
}

}  // namespace pwap
