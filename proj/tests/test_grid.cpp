#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "resolv/grid.hpp"
#include "resolv/quadrature.hpp"
#include "resolv/types.hpp"

using namespace resolv;

namespace {

Vector vec1(double x) { return Vector::Constant(1, x); }

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<int>(values.size()));
  int i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

EpsGrid grid1d(double offset, double eps, double lo, double hi) {
  return EpsGrid::make(vec1(offset), eps, Box{vec1(lo), vec1(hi)});
}

}  // namespace

TEST_CASE("point enumeration") {
  {
    const auto pts = enumerate_points(grid1d(0.0, 1.0, -1.0, 1.0));
    REQUIRE(pts.size() == 3);
    CHECK(pts[0][0] == -1.0);
    CHECK(pts[1][0] == 0.0);
    CHECK(pts[2][0] == 1.0);
  }
  {
    const auto pts = enumerate_points(grid1d(0.5, 1.0, 0.0, 2.0));
    REQUIRE(pts.size() == 2);
    CHECK(pts[0][0] == 0.5);
    CHECK(pts[1][0] == 1.5);
  }
  {
    const EpsGrid g = EpsGrid::make(vec({0.0, 0.0}), 0.5,
                                    Box{vec({0.0, 0.0}), vec({1.0, 1.0})});
    const auto pts = enumerate_points(g);
    CHECK(pts.size() == 9);
    CHECK(g.point_count() == 9);
    // Lexicographic in the lattice index.
    CHECK(pts[0] == vec({0.0, 0.0}));
    CHECK(pts[1] == vec({0.0, 0.5}));
    CHECK(pts[3] == vec({0.5, 0.0}));
    for (const Vector& p : pts) CHECK(g.contains(p));
    CHECK_FALSE(g.contains(vec({0.25, 0.5})));
    CHECK_FALSE(g.contains(vec({0.0, 1.5})));
  }
  CHECK_THROWS_AS(enumerate_points(grid1d(0.0, 1e-7, -5.0, 5.0)), DomainError);
}

TEST_CASE("per-axis counts multiply") {
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    const int d = 1 + static_cast<int>(rng.uniform(0.0, 3.0));
    Vector off(d), lo(d), hi(d);
    for (int j = 0; j < d; ++j) {
      off[j] = rng.uniform(-1.0, 1.0);
      lo[j] = rng.uniform(-3.0, 0.0);
      hi[j] = lo[j] + rng.uniform(0.0, 4.0);
    }
    const EpsGrid g = EpsGrid::make(off, rng.uniform(0.3, 1.5), Box{lo, hi});
    std::size_t product = 1;
    for (int j = 0; j < d; ++j) {
      product *= static_cast<std::size_t>(g.axis_range(j).count());
    }
    CHECK(enumerate_points(g).size() == product);
  }
}

TEST_CASE("nearest point with half-down ties") {
  const EpsGrid g = grid1d(0.0, 1.0, -3.0, 3.0);
  CHECK(nearest_point(g, vec1(0.4))[0] == 0.0);
  CHECK(nearest_point(g, vec1(0.5))[0] == 0.0);
  CHECK(nearest_point(g, vec1(0.51))[0] == 1.0);
  CHECK(nearest_point(g, vec1(-0.5))[0] == -1.0);

  const EpsGrid g2 = EpsGrid::make(vec({0.0, 0.0}), 0.1,
                                   Box{vec({-1.0, -1.0}), vec({1.0, 1.0})});
  const Vector p = nearest_point(g2, vec({0.26, 0.74}));
  CHECK(p[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.7).epsilon(1e-12));

  CHECK_THROWS_AS(nearest_point(g, vec1(3.51)), DomainError);

  Rng rng(13);
  for (int i = 0; i < 200; ++i) {
    const Vector theta = vec({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
    const double dist = (nearest_point(g2, theta) - theta).norm();
    CHECK(dist <= 0.1 * std::sqrt(2.0) / 2.0 + 1e-12);
  }
}

TEST_CASE("gaussian lattice sum bounds") {
  CHECK(gaussian_sum_bound(1.0, 1.0, 1, true) ==
        doctest::Approx(2.772453850905516).epsilon(1e-13));
  CHECK(gaussian_sum_bound(1.0, 1.0, 1, false) ==
        doctest::Approx(4.544907701811032).epsilon(1e-13));

  // Brute force sum over the integers.
  CompensatedSum brute;
  for (int z = -30; z <= 30; ++z) brute.add(std::exp(-double(z) * z));
  CHECK(brute.value() == doctest::Approx(1.7726372048266522).epsilon(1e-13));
  CHECK(brute.value() <= gaussian_sum_bound(1.0, 1.0, 1, true));

  Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    const double eps = rng.uniform(0.05, 2.0);
    const double c = rng.uniform(0.05, 5.0);
    const int d = 1 + static_cast<int>(rng.uniform(0.0, 3.0));
    CHECK(gaussian_sum_bound(eps, c, d, true) <=
          gaussian_sum_bound(eps, c, d, false));
  }
  CHECK_THROWS_AS(gaussian_sum_bound(0.0, 1.0, 1, true), DomainError);
  CHECK_THROWS_AS(gaussian_sum_bound(1.0, -1.0, 1, true), DomainError);
}

TEST_CASE("truncated lattice sums with analytic remainders") {
  const LatticeSpec lattice{vec1(0.0), 1.0, 1};
  {
    const RadialEnvelope env = gaussian_envelope(1.0, 1.0, 1);
    const auto f = [](const Vector& p) { return std::exp(-p[0] * p[0]); };
    const TruncatedSum s =
        truncated_grid_sum(lattice, f, vec1(0.0), 20.0, &env);
    CHECK(s.sum == doctest::Approx(1.7726372048266522).epsilon(1e-13));
    CHECK(s.tail_bound < 1e-170);
    CHECK(s.points == 41);
  }
  {
    const auto zero = [](const Vector&) { return 0.0; };
    const RadialEnvelope env = gaussian_envelope(0.0, 1.0, 1);
    const TruncatedSum s =
        truncated_grid_sum(lattice, zero, vec1(0.0), 5.0, &env);
    CHECK(s.sum == 0.0);
    CHECK(s.tail_bound == 0.0);
  }
  {
    // sum of 1/|z|^3 over |z| >= 3: 2 (zeta(3) - 1 - 1/8).
    const auto f = [](const Vector& p) {
      const double r = std::abs(p[0]);
      return r >= 3.0 ? 1.0 / (r * r * r) : 0.0;
    };
    const RadialEnvelope env = power_envelope(1.0, 3.0, 1);
    const TruncatedSum s =
        truncated_grid_sum(lattice, f, vec1(0.0), 1e5, &env);
    CHECK(s.sum == doctest::Approx(0.15411380631918857).epsilon(1e-8));
  }
  const auto f = [](const Vector&) { return 1.0; };
  CHECK_THROWS_AS(truncated_grid_sum(lattice, f, vec1(0.0), 5.0, nullptr),
                  DomainError);
  {
    const RadialEnvelope env = power_envelope(1.0, 3.0, 1);
    const auto negative = [](const Vector&) { return -1.0; };
    CHECK_THROWS_AS(truncated_grid_sum(lattice, negative, vec1(0.0), 5.0, &env),
                    DomainError);
  }
}

TEST_CASE("gaussian envelope tail integrals match quadrature") {
  // int_s^inf r^{d-1} exp(-c r^2) dr for d = 1..6 against the adaptive rule.
  for (int d = 1; d <= 6; ++d) {
    for (double c : {0.3, 1.0, 2.5}) {
      for (double s : {0.0, 0.7, 2.0}) {
        const RadialEnvelope env = gaussian_envelope(1.0, c, d);
        const auto weighted = [&](double r) {
          return std::pow(r, d - 1) * std::exp(-c * r * r);
        };
        const double quad = integrate(weighted, s, s + 30.0, 1e-13).value;
        CHECK(env.tail_integral(s) == doctest::Approx(quad).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("enumeration index matches enumeration order") {
  const EpsGrid g = EpsGrid::make(Vector::Zero(2), 0.5,
                                  Box{Vector::Constant(2, -1.0),
                                      Vector::Constant(2, 1.0)});
  const auto points = enumerate_points(g);
  for (std::size_t i = 0; i < points.size(); ++i) {
    CHECK(enumeration_index(g, nearest_index(g, points[i])) == i);
  }
}

TEST_CASE("bounded-grid truncated sum") {
  const EpsGrid g = grid1d(0.0, 1.0, -3.0, 3.0);
  const auto f = [](const Vector& p) { return 1.0 + 0.0 * p[0]; };
  const TruncatedSum s = truncated_grid_sum(g, f, vec1(0.0), 10.0);
  CHECK(s.sum == 7.0);
  CHECK(s.tail_bound == 0.0);
  // Radius short of the box without an envelope is an error.
  CHECK_THROWS_AS(truncated_grid_sum(g, f, vec1(0.0), 1.5), DomainError);
}

TEST_CASE("tail integral bound") {
  const RadialEnvelope env = power_envelope(1.0, 3.0, 1);
  const TailBound b = tail_sum_integral_bound(env, 1.0, 1, 3.0);
  // Coefficients: exact 2 sqrt(pi) / ((1/4) Gamma(1/2)) = 8; Stirling 20.
  // Integral of r^-3 from 3/4 is 8/9.
  CHECK(b.exact_gamma == doctest::Approx(8.0 * 8.0 / 9.0).epsilon(1e-12));
  CHECK(b.stirling == doctest::Approx(160.0 / 9.0).epsilon(1e-12));
  CHECK(b.exact_gamma <= b.stirling);
  CHECK_THROWS_AS(tail_sum_integral_bound(env, 1.0, 1, 2.9), HypothesisError);

  Rng rng(19);
  for (int i = 0; i < 300; ++i) {
    const int d = 1 + static_cast<int>(rng.uniform(0.0, 6.0));
    const double eps = rng.uniform(0.01, 3.0);
    CHECK(tail_coefficient_exact(eps, d) <=
          tail_coefficient_stirling(eps, d) * (1.0 + 1e-12));
  }
}

TEST_CASE("power sum bound") {
  CHECK(power_sum_bound(1.0, 1, 3.0, 3.0) ==
        doctest::Approx(160.0 / 9.0).epsilon(1e-12));

  // Oracle comparison at the worked values.
  CompensatedSum brute;
  for (int z = 3; z <= 2000; ++z) brute.add(2.0 / (double(z) * z * z));
  CHECK(brute.value() <= power_sum_bound(1.0, 1, 3.0, 3.0));

  CHECK_THROWS_AS(power_sum_bound(1.0, 1, 3.0, 1.0), HypothesisError);
  CHECK_THROWS_AS(power_sum_bound(1.0, 1, 0.5, 3.0), HypothesisError);

  // Non-increasing in R.
  Rng rng(23);
  for (int i = 0; i < 200; ++i) {
    const double eps = rng.uniform(0.05, 1.0);
    const int d = 1 + static_cast<int>(rng.uniform(0.0, 3.0));
    const double q = d + rng.uniform(0.5, 4.0);
    const double r1 = 3.0 * eps + rng.uniform(0.0, 3.0);
    const double r2 = r1 + rng.uniform(0.0, 3.0);
    CHECK(power_sum_bound(eps, d, r2, q) <=
          power_sum_bound(eps, d, r1, q) * (1.0 + 1e-12));
  }
}

TEST_CASE("power decay regime dispatch") {
  // Large-sample worked value: 48 / (0.1 sqrt(50 log 3)).
  const PowerDecayBound large =
      power_decay_regime_bound(0.1, 1, 12.0, 1.0, 1.0, 0.5, 100.0, 0.0, 0.0);
  CHECK(large.regime == PowerDecayRegime::LargeSample);
  CHECK(large.value == doctest::Approx(64.76405141972255).epsilon(1e-12));

  // Small-sample regime, d = 5: evaluate the formula independently.
  const PowerDecayBound small =
      power_decay_regime_bound(1.0, 5, 4.0, 1.0, 1.0, 0.5, 4.0, 1.0, 0.0);
  CHECK(small.regime == PowerDecayRegime::SmallSample);
  {
    const double top = 4.0 * std::sqrt(2.0 * M_PI * M_E) * std::sqrt(5.0);
    const double expected = 2.0 * std::pow(top / std::sqrt(4.0 * 0.5), 5.0);
    CHECK(small.value == doctest::Approx(expected).epsilon(1e-12));
  }

  CHECK_THROWS_AS(
      power_decay_regime_bound(2.0, 1, 5.0, 1.0, 1.0, 0.5, 100.0, 0.0, 0.0),
      HypothesisError);  // R < 3 eps
  CHECK_THROWS_AS(
      power_decay_regime_bound(0.1, 3, 5.0, 1.0, 1.0, 0.5, 2.0, 0.0, 0.0),
      HypothesisError);  // kappa = 0 with small n

  // Dispatch is total for kappa > 0.
  Rng rng(29);
  for (int i = 0; i < 500; ++i) {
    const int d = 1 + static_cast<int>(rng.uniform(0.0, 3.0));
    const double alpha = rng.uniform(0.1, 1.0);
    const double b = rng.uniform(0.3, 2.0);
    const double a = rng.uniform(0.2, 1.5);
    const double eps = rng.uniform(0.05, 1.0);
    const double R = std::max(4.0 * std::pow(a, 1.0 / b), 3.0 * eps) *
                     (1.01 + rng.uniform01());
    const double n = 1.0 + static_cast<int>(rng.uniform(0.0, 60.0));
    const double kappa = rng.uniform(0.1, 2.0);
    const PowerDecayBound bound =
        power_decay_regime_bound(eps, d, R, a, b, alpha, n, kappa, 0.5);
    CHECK(std::isfinite(bound.value));
    CHECK(bound.value > 0.0);
  }

  // Exact boundary n = (d+1)/(alpha b): minimum of the adjacent bounds.
  {
    const int d = 2;
    const double b = 1.0, alpha = 0.5;
    const double n = (d + 1) / (alpha * b);  // 6
    const double a = 0.5, eps = 0.3, kappa = 1.0, t_norm = 0.0;
    const double R = 11.0;
    const PowerDecayBound at_boundary =
        power_decay_regime_bound(eps, d, R, a, b, alpha, n, kappa, t_norm);
    CHECK(at_boundary.regime == PowerDecayRegime::LargeMiddleBoundary);
    const double log_ratio = std::log(R / (4.0 * std::pow(a, 1.0 / b)));
    const double large_value =
        std::pow(4.0 * R / (eps * std::sqrt(n * alpha * b * log_ratio)), d);
    const double middle_value =
        std::pow(20.0 / (eps * std::sqrt(n * alpha * b)), d) *
        (22.0 / (R * R * R) + 2.0 * std::sqrt(kappa));
    CHECK(at_boundary.value ==
          doctest::Approx(std::min(large_value, middle_value)).epsilon(1e-12));
  }

  // Monotone non-increasing in n within the large-sample regime.
  for (int i = 0; i < 100; ++i) {
    const double n1 = 10.0 + static_cast<int>(rng.uniform(0.0, 50.0));
    const double n2 = n1 + 1.0 + static_cast<int>(rng.uniform(0.0, 50.0));
    const double v1 =
        power_decay_regime_bound(0.2, 1, 9.0, 1.0, 1.0, 0.5, n1, 0.0, 0.0)
            .value;
    const double v2 =
        power_decay_regime_bound(0.2, 1, 9.0, 1.0, 1.0, 0.5, n2, 0.0, 0.0)
            .value;
    CHECK(v2 <= v1 * (1.0 + 1e-12));
  }
}

TEST_CASE("gaussian sum bound is monotone in c") {
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    const double eps = rng.uniform(0.05, 1.5);
    const int d = 1 + static_cast<int>(rng.uniform(0.0, 3.0));
    const double c1 = rng.uniform(0.05, 3.0);
    const double c2 = c1 + rng.uniform(0.0, 3.0);
    CHECK(gaussian_sum_bound(eps, c2, d, false) <=
          gaussian_sum_bound(eps, c1, d, false) * (1.0 + 1e-12));
  }
}
