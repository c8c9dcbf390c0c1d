#include <random>

#include "dense_oracle.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "pwap/estimators.hpp"

using namespace pwap;

namespace {

struct Setup {
  MeanFieldModel model = fixtures::two_wells();
  std::shared_ptr<const PlaneWaveBasis> fine;
  GroundState reference;
  GroundState coarse;
  double ecut = 10.0;
};

const Setup& setup() {
  static const Setup s = [] {
    Setup x;
    x.fine = fixtures::basis(x.model, 64.0);
    x.reference = scf(x.model, x.fine, fixtures::tight());
    x.coarse = scf(x.model, fixtures::basis(x.model, x.ecut), fixtures::tight());
    return x;
  }();
  return s;
}

}  // namespace

TEST_SUITE("estimators") {
  TEST_CASE("real coordinates round trip and halve the Frobenius inner product") {
    std::mt19937_64 rng(1);
    const Eigen::MatrixXcd phi = oracle::random_orthonormal(20, 2, rng);
    const TangentSet a{oracle::random_tangent(phi, rng)}, b{oracle::random_tangent(phi, rng)};
    const Eigen::VectorXd va = to_real_coordinates(a), vb = to_real_coordinates(b);
    CHECK((from_real_coordinates(va, 20, 2).xi - a.xi).norm() == 0.0);
    CHECK(inner(a, b) == doctest::Approx(2.0 * va.dot(vb)));
  }

  TEST_CASE("frequency split partitions the fine basis") {
    const Setup& s = setup();
    const FrequencySplit split(s.fine, s.ecut);
    std::mt19937_64 rng(2);
    const TangentSet x{oracle::random_tangent(lift(s.coarse.orbitals, s.fine).phi, rng)};
    CHECK((split.low(x).xi + split.high(x).xi - x.xi).norm() == 0.0);
    CHECK(split.mask().sum() == doctest::Approx(static_cast<double>(s.coarse.orbitals.basis->size())));
  }

  TEST_CASE("the variational residual has no coarse component") {
    const Setup& s = setup();
    const FrequencySplit split(s.fine, s.ecut);
    const ErrorReport rep = qoi_error_estimates(s.model, split, s.coarse.orbitals, &s.reference.orbitals);
    CHECK(rep.low_frequency_residual < 1e-9);
    CHECK(rep.residual_norm > 1e-4);
  }

  TEST_CASE("error report fields are consistent with their definitions") {
    const Setup& s = setup();
    const FrequencySplit split(s.fine, s.ecut);
    const ErrorReport rep = qoi_error_estimates(s.model, split, s.coarse.orbitals, &s.reference.orbitals);
    REQUIRE(rep.has_reference());
    CHECK(rep.energy == doctest::Approx(s.coarse.energy).epsilon(1e-12));
    CHECK(rep.energy_reference == doctest::Approx(s.reference.energy).epsilon(1e-12));
    // dE.X_err is the linearization of a second-order quantity: twice the error.
    CHECK(rep.energy_estimate.exact == doctest::Approx(2.0 * (rep.energy - rep.energy_reference)).epsilon(0.05));
    // Linear regime: dF.X_err tracks F - F*.
    const Eigen::MatrixXd df = rep.forces - rep.forces_reference;
    CHECK((rep.dforce_exact - df).norm() < 0.1 * df.norm());
    CHECK(rep.density_estimate.exact == doctest::Approx(rep.density_error).epsilon(0.05));
    CHECK(rep.density_post_error.exact < 0.1 * rep.density_error);
  }

  TEST_CASE("no reference: exact estimates are NaN, computable ones are not") {
    const Setup& s = setup();
    const FrequencySplit split(s.fine, s.ecut);
    const ErrorReport rep = qoi_error_estimates(s.model, split, s.coarse.orbitals, nullptr);
    CHECK_FALSE(rep.has_reference());
    CHECK(std::isnan(rep.energy_estimate.exact));
    CHECK(std::isfinite(rep.energy_estimate.schur));
    CHECK(std::isfinite(rep.density_estimate.residual));
  }

  TEST_CASE("norm bounds hold and the metric bound is sharp") {
    const Setup& s = setup();
    const TangentOperators rops(s.model, s.reference.orbitals);
    const OrbitalMetric rmetric = OrbitalMetric::kinetic(rops);
    const OperatorConstants c = operator_constants(rops, rmetric);
    CHECK(c.plain > 0.0);
    CHECK(c.metric >= 1.0 - 1e-6);

    const TangentOperators ops(s.model, lift(s.coarse.orbitals, s.fine));
    const OrbitalMetric metric = OrbitalMetric::kinetic(ops);
    const BoundReport b = norm_bound_report(ops, metric, c, &s.reference.orbitals);
    CHECK(b.bound_plain >= b.error_norm);
    CHECK(b.bound_metric >= b.metric_error_norm);
    CHECK(b.bound_metric / b.metric_error_norm < 3.0);
    CHECK(b.bound_plain / b.error_norm > b.bound_metric / b.metric_error_norm);
  }

  TEST_CASE("smallest Hessian eigenvalue agrees with the inverse Jacobian norm") {
    const Setup& s = setup();
    const TangentOperators rops(s.model, s.reference.orbitals);
    const double lmin = smallest_hessian_eigenvalue(rops);
    CHECK(inv_jacobian_norm(rops, nullptr) == doctest::Approx(1.0 / lmin));
  }

  TEST_CASE("Schur residual reproduces the fine-grid Newton step on its coarse block") {
    const Setup& s = setup();
    const FrequencySplit split(s.fine, s.ecut);
    const TangentOperators ops(s.model, lift(s.coarse.orbitals, s.fine));
    const OrbitalMetric metric = OrbitalMetric::kinetic(ops);
    const TangentSet y = schur_residual(ops, metric, split, 1e-11);
    // By construction, Pi_1 (Omega + K) Y = Pi_1 R exactly.
    const TangentSet lhs = split.low(ops.omega_plus_k(y));
    const TangentSet rhs = split.low(ops.residual());
    CHECK((lhs.xi - rhs.xi).norm() < 1e-9 * (1.0 + ops.residual().xi.norm()));
    CHECK((s.coarse.orbitals.phi.adjoint() * restrict_to({s.fine, y.xi}, s.coarse.orbitals.basis).phi).norm() < 1e-10);
  }

  TEST_CASE("Schur residual requires coarse orbitals") {
    const Setup& s = setup();
    const FrequencySplit split(s.fine, s.ecut);
    const TangentOperators ops(s.model, s.reference.orbitals);
    const OrbitalMetric metric = OrbitalMetric::kinetic(ops);
    CHECK_THROWS_AS(schur_residual(ops, metric, split, 1e-10), std::invalid_argument);
  }

  TEST_CASE("force operator-norm bound dominates the force error") {
    const Setup& s = setup();
    const OrbitalSet phi = lift(s.coarse.orbitals, s.fine);
    const double err = norm(tangent_error(phi, s.reference.orbitals));
    const Eigen::MatrixXd df = forces(s.model, phi) - forces(s.model, s.reference.orbitals);
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(operator_norm_force_bound(s.model, phi, j, 0, err) >= std::abs(df(0, static_cast<Eigen::Index>(j))));
    CHECK_THROWS_AS(projected_force_operator_norm(s.model, phi, 5, 0), std::out_of_range);
  }
}
