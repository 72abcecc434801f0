#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "resolv/quadrature.hpp"

using namespace resolv;

TEST_CASE("polynomial integral is exact") {
  const auto f = [](double x) { return x * x; };
  const QuadratureResult r = integrate(f, 0.0, 1.0, 1e-12);
  CHECK(r.value == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("standard normal density integrates to one") {
  const auto f = [](double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  };
  const QuadratureResult r = integrate(f, -12.0, 12.0, 1e-12);
  CHECK(std::abs(r.value - 1.0) < 1e-10);
  CHECK(r.error < 1e-10);
}

TEST_CASE("half-line integral of an exponential") {
  const auto f = [](double x) { return std::exp(-x); };
  const QuadratureResult r = integrate_half_line(f, 0.0, 1e-10);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("oscillatory integral") {
  const QuadratureResult r =
      integrate([](double x) { return std::sin(x); }, 0.0, M_PI, 1e-12);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("divergent integrand reports failure with its error estimate") {
  const auto f = [](double x) { return 1.0 / x; };
  CHECK_THROWS_AS(integrate(f, 0.0, 1.0, 1e-10, 64), QuadratureError);
}

TEST_CASE("reversed interval is rejected") {
  CHECK_THROWS_AS(integrate([](double) { return 1.0; }, 1.0, 0.0),
                  DomainError);
}
