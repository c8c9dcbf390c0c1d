#include <cmath>

#include "doctest.h"
#include "pwap/gp_appendix.hpp"

using namespace pwap;

TEST_SUITE("gp-appendix") {
  TEST_CASE("V = 0 ground state is the constant function") {
    const GpState st = gp_ground_state(0.0, 8.0);
    CHECK(st.lambda == doctest::Approx(1.0 / (2.0 * std::numbers::pi)).epsilon(1e-10));
    CHECK(std::abs(st.orbitals.phi(0, 0) - 1.0) < 1e-10);
  }

  TEST_CASE("V = 0 operator norm matches the closed form") {
    for (double n : {4.0, 8.0}) {
      const GpPoint p = difference_operator_norm(0.0, n, 16.0 * 16.0);
      CAPTURE(n);
      CHECK(p.norm == doctest::Approx(gp_constant_norm(n)).epsilon(1e-6));
    }
    CHECK(gp_constant_norm(4.0) == doctest::Approx((1.0 - 1.0 / std::numbers::pi) / (9.0 + 1.0 / std::numbers::pi)));
  }

  TEST_CASE("norms decrease with the cutoff for V = 0.3 cos") {
    GpOptions o;
    o.reference_factor = 8;
    const GpVerification v = verify_proposition(0.3, {4, 8, 16}, o);
    REQUIRE(v.points.size() == 3);
    CHECK(v.points[0].norm > v.points[1].norm);
    CHECK(v.points[1].norm > v.points[2].norm);
    CHECK(v.fitted);
    CHECK(v.reference_cutoff == 128.0);
  }

  TEST_CASE("single cutoff skips the fit with a warning") {
    const GpVerification v = verify_proposition(0.0, {4});
    CHECK_FALSE(v.fitted);
    CHECK_FALSE(v.warning.empty());
    CHECK(std::isnan(v.slope));
  }

  TEST_CASE("log-log fit recovers a power law") {
    std::vector<double> x{0.1, 0.2, 0.4, 0.8}, y;
    for (double xi : x) y.push_back(3.0 * std::pow(xi, 1.25));
    const auto [slope, intercept] = loglog_fit(x, y);
    CHECK(slope == doctest::Approx(1.25));
    CHECK(std::exp(intercept) == doctest::Approx(3.0));
    CHECK_THROWS_AS(loglog_fit({1.0}, {1.0}), std::invalid_argument);
  }

  TEST_CASE("cutoffs must increase") {
    CHECK_THROWS_AS(verify_proposition(0.3, {8, 4}), std::invalid_argument);
    CHECK_THROWS_AS(difference_operator_norm(0.3, 8, 8), std::invalid_argument);
  }
}
