#include <doctest.h>

#include <cmath>

#include "coshf/quadrature.hpp"

using namespace uavsec;

TEST_CASE("two-point rule") {
  const QuadratureRule q = gauss_legendre01(2);
  REQUIRE(q.order() == 2);
  CHECK(q.nodes[0] == doctest::Approx(0.5 - 0.5 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(q.nodes[1] == doctest::Approx(0.5 + 0.5 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(q.weights[0] == doctest::Approx(0.5));
}

TEST_CASE("exact for polynomials up to degree 2n-1") {
  for (int n = 1; n <= 16; ++n) {
    const QuadratureRule q = gauss_legendre01(n);
    double wsum = 0;
    for (double w : q.weights) wsum += w;
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
    for (int d = 0; d <= 2 * n - 1; ++d) {
      double s = 0;
      for (int i = 0; i < n; ++i) s += q.weights[static_cast<std::size_t>(i)] * std::pow(q.nodes[static_cast<std::size_t>(i)], d);
      CHECK(s == doctest::Approx(1.0 / (d + 1)).epsilon(1e-12));
    }
    for (int i = 0; i + 1 < n; ++i) CHECK(q.nodes[static_cast<std::size_t>(i)] < q.nodes[static_cast<std::size_t>(i + 1)]);
  }
}

TEST_CASE("smooth integrand converges") {
  const QuadratureRule q = gauss_legendre01(8);
  double s = 0;
  for (int i = 0; i < 8; ++i) s += q.weights[static_cast<std::size_t>(i)] * std::exp(q.nodes[static_cast<std::size_t>(i)]);
  CHECK(s == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-13));
}
