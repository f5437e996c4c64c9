#include <cmath>
#include <numbers>

#include "doctest.h"
#include "patchss/errors.hpp"
#include "patchss/quadrature.hpp"
#include "patchss/roots.hpp"

using namespace patchss;

TEST_CASE("Gauss-Kronrod integrates polynomials exactly") {
  for (int k = 0; k <= 20; ++k) {
    const auto est = quad::adaptive_gauss_kronrod([k](double x) { return std::pow(x, k); }, -0.5,
                                                  1.5, 1e-14);
    const double exact = (std::pow(1.5, k + 1) - std::pow(-0.5, k + 1)) / (k + 1);
    CHECK(est.value == doctest::Approx(exact).epsilon(1e-13));
  }
}

TEST_CASE("Gauss-Kronrod handles an endpoint square-root singularity") {
  const auto est = quad::adaptive_gauss_kronrod([](double x) { return 1.0 / std::sqrt(x); }, 0.0,
                                                1.0, 1e-10);
  CHECK(est.value == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(est.error <= 1e-10);
}

TEST_CASE("Gauss-Kronrod reports the achieved error when it runs out of intervals") {
  try {
    quad::adaptive_gauss_kronrod([](double x) { return std::sin(1.0 / (x + 1e-3)); }, 0.0, 1.0,
                                 1e-14, 0.0, 2);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(e.achieved() > 1e-14);
  }
}

TEST_CASE("Gauss-Legendre rules") {
  for (int n : {1, 2, 5, 64, 257}) {
    const auto& rule = quad::gauss_legendre(n);
    REQUIRE(rule.nodes.size() == static_cast<std::size_t>(n));
    double wsum = 0.0;
    for (double w : rule.weights) wsum += w;
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
    for (int i = 0; i < n; ++i) {
      CHECK(rule.nodes[i] == doctest::Approx(-rule.nodes[n - 1 - i]).epsilon(1e-14));
    }
    // exact up to degree 2n - 1
    const int deg = 2 * n - 1;
    const double v =
        quad::gauss_legendre_integrate([deg](double x) { return std::pow(x, deg); }, 0.0, 1.0, n);
    CHECK(v == doctest::Approx(1.0 / (deg + 1)).epsilon(1e-12));
  }
  CHECK(quad::gauss_legendre_integrate([](double x) { return std::cos(x); }, 0.0,
                                       std::numbers::pi / 2, 64) ==
        doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("bisection and safeguarded Newton") {
  auto g = [](double x) { return x * x - 2.0; };
  CHECK(roots::bisect(g, 0.0, 2.0, 1e-14).x == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(roots::bisect(g, 2.0, 3.0, 1e-12), BracketError);
  auto gd = [](double x) { return std::pair{std::cos(x) - x, -std::sin(x) - 1.0}; };
  const auto r = roots::safeguarded_newton(gd, 0.0, 1.0, 1e-15);
  CHECK(r.x == doctest::Approx(0.7390851332151607).epsilon(1e-15));
  CHECK(r.iterations < 20);
}
