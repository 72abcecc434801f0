#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "resolv/estimator.hpp"

using namespace resolv;

namespace {

Vector vec1(double x) { return Vector::Constant(1, x); }

EpsGrid grid1d(double offset, double eps, double lo, double hi) {
  return EpsGrid::make(vec1(offset), eps, Box{vec1(lo), vec1(hi)});
}

DataSample external_sample(std::initializer_list<double> values) {
  Matrix points(static_cast<int>(values.size()), 1);
  int i = 0;
  for (double v : values) points(i++, 0) = v;
  return DataSample{std::move(points), std::nullopt};
}

}  // namespace

TEST_CASE("kraft sums") {
  const EpsGrid g = grid1d(0.0, 0.1, -5.0, 5.0);  // 101 points
  const auto points = enumerate_points(g);
  REQUIRE(points.size() == 101);

  // Uniform twice-log-reciprocal codelength telescopes to the pmf total.
  const Penalty uniform = Penalty::codelength(
      std::vector<double>(101, 1.0 / 101.0), CodelengthMode::TwiceLogReciprocal);
  const KraftSum ks = kraft_sum(points, uniform);
  CHECK(ks.sum == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(ks.twice_kraft_ok);

  const KraftSum zero = kraft_sum(points, Penalty::zero());
  CHECK(zero.sum == 101.0);
  CHECK_FALSE(zero.twice_kraft_ok);

  const EpsGrid unit = grid1d(0.0, 1.0, -5.0, 5.0);
  const KraftSum sq = kraft_sum(unit, Penalty::squared_norm());
  CHECK(sq.sum == doctest::Approx(2.5066282575371260).epsilon(1e-13));
}

TEST_CASE("codelength penalty validation") {
  CHECK_THROWS_AS(Penalty::codelength({0.5, 0.4}, CodelengthMode::LogReciprocal),
                  DomainError);
  CHECK_THROWS_AS(
      Penalty::codelength({0.5, 0.5, -0.1}, CodelengthMode::LogReciprocal),
      DomainError);
  // A table must cover every grid point.
  const EpsGrid g = grid1d(0.0, 1.0, -1.0, 1.0);
  CHECK_THROWS_AS(kraft_sum(g, Penalty::table({1.0, 2.0})), DomainError);
}

TEST_CASE("penalized mle worked examples") {
  const Model gauss = Model::gaussian_location(1);
  const EpsGrid g = grid1d(0.0, 1.0, -1.0, 1.0);  // {-1, 0, 1}

  {
    const MleResult fit =
        penalized_mle(gauss, g, Penalty::zero(), external_sample({0.2}));
    CHECK(fit.theta[0] == 0.0);
  }
  {
    // Exact tie at the midpoint goes to the smaller lattice index.
    const EpsGrid g01 = grid1d(0.0, 1.0, 0.0, 1.0);
    const MleResult fit = penalized_mle(gauss, g01, Penalty::zero(),
                                        external_sample({0.0, 1.0}));
    CHECK(fit.theta[0] == 0.0);
  }
  {
    // Penalty beats the half-unit likelihood gap.
    const EpsGrid g01 = grid1d(0.0, 1.0, 0.0, 1.0);
    const MleResult fit = penalized_mle(gauss, g01, Penalty::squared_norm(),
                                        external_sample({1.0}));
    CHECK(fit.theta[0] == 0.0);
  }
}

TEST_CASE("mle equals the nearest grid point to the sample mean") {
  const Model gauss = Model::gaussian_location(1);
  const EpsGrid g = grid1d(0.0, 0.25, -4.0, 4.0);
  const MleWorkspace ws(gauss, g, Penalty::zero());
  Rng rng(57);
  for (int i = 0; i < 100; ++i) {
    const Vector theta = vec1(rng.uniform(-2.0, 2.0));
    const DataSample data = gauss.sample(theta, 40, rng.next_u64());
    const MleResult fit = penalized_mle(ws, data);
    const Vector nearest = nearest_point(g, vec1(data.points.col(0).mean()));
    CHECK(fit.theta[0] == nearest[0]);
  }
}

TEST_CASE("grid scan matches a direct objective scan") {
  // The sufficient-statistic path must agree with a plain evaluation of
  // -log-likelihood + penalty at every grid point.
  Rng rng(58);
  const Model models[] = {Model::gaussian_location(1),
                          Model::bernoulli_natural(),
                          Model::laplace_location(1)};
  for (const Model& m : models) {
    const double half = m.id() == FamilyId::BernoulliNatural ? 1.0 : 3.0;
    const EpsGrid g = grid1d(0.05, 0.3, -half, half);
    const auto points = enumerate_points(g);
    std::vector<double> table(points.size());
    for (double& v : table) v = rng.uniform(0.0, 2.0);
    const Penalty penalty = Penalty::table(table);

    const Vector theta = vec1(rng.uniform(-half * 0.8, half * 0.8));
    const DataSample data = m.sample(theta, 25, rng.next_u64());

    const MleResult fit = penalized_mle(m, g, penalty, data);

    std::size_t best = 0;
    double best_objective = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
      double nll = 0.0;
      for (int r = 0; r < data.n(); ++r) {
        nll -= m.log_density(points[i], data.points.row(r));
      }
      const double objective = nll + table[i];
      if (objective < best_objective) {
        best_objective = objective;
        best = i;
      }
    }
    CHECK(fit.index == best);
  }
}

TEST_CASE("penalty constant shifts never move the argmin") {
  const Model gauss = Model::gaussian_location(1);
  const EpsGrid g = grid1d(0.0, 0.2, -3.0, 3.0);
  const auto points = enumerate_points(g);
  Rng rng(59);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> table(points.size());
    for (double& v : table) v = rng.uniform(0.0, 3.0);
    std::vector<double> shifted = table;
    const double shift = rng.uniform(-4.0, 4.0);
    for (double& v : shifted) v += shift;

    const DataSample data = gauss.sample(vec1(0.3), 20, rng.next_u64());
    const MleResult a = penalized_mle(gauss, g, Penalty::table(table), data);
    const MleResult b = penalized_mle(gauss, g, Penalty::table(shifted), data);
    CHECK(a.index == b.index);
  }
}

TEST_CASE("equivalent penalty renormalizes the kraft sum to one") {
  const EpsGrid g = grid1d(0.0, 0.5, -3.0, 3.0);
  const auto points = enumerate_points(g);
  Rng rng(60);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> table(points.size());
    for (double& v : table) v = rng.uniform(0.0, 5.0);
    const double z = kraft_sum(points, Penalty::table(table)).sum;
    std::vector<double> equivalent = table;
    for (double& v : equivalent) v += 2.0 * std::log(z);
    const KraftSum renorm = kraft_sum(points, Penalty::table(equivalent));
    CHECK(renorm.sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("mle determinism") {
  const Model gauss = Model::gaussian_location(2);
  const EpsGrid g = EpsGrid::make(Vector::Zero(2), 0.25,
                                  Box::centered(2, 2.0));
  const DataSample data = gauss.sample(Vector::Zero(2), 50, 123);
  const MleResult a = penalized_mle(gauss, g, Penalty::squared_norm(), data);
  const MleResult b = penalized_mle(gauss, g, Penalty::squared_norm(), data);
  CHECK(a.index == b.index);
  CHECK(a.theta == b.theta);
  CHECK(a.objective == b.objective);
}

TEST_CASE("adaptive model-selector costs") {
  {
    const AdaptiveL0 out = build_adaptive_penalty(std::vector<double>(50, 1.0));
    CHECK(out.class_sum == doctest::Approx(0.9726538547250616).epsilon(1e-12));
    CHECK(out.twice_kraft_ok);
    // l0(k) = k sqrt(2) + 2 log 1.
    CHECK(out.l0[0] == doctest::Approx(M_SQRT2).epsilon(1e-13));
    CHECK(out.l0[4] == doctest::Approx(5.0 * M_SQRT2).epsilon(1e-13));
  }
  {
    const AdaptiveL0 out = build_adaptive_penalty({5.0});
    CHECK(out.l0.size() == 1);
    CHECK(out.l0[0] == doctest::Approx(4.633089387241296).epsilon(1e-12));
    CHECK(out.twice_kraft_ok);
  }
  CHECK_THROWS_AS(build_adaptive_penalty({1.0, 0.0}), DomainError);
  CHECK_THROWS_AS(build_adaptive_penalty({}), DomainError);
}

TEST_CASE("adaptive penalty variant evaluates selector plus within-model") {
  const EpsGrid g1 = grid1d(0.0, 1.0, -1.0, 1.0);
  const EpsGrid g2 = grid1d(0.0, 0.5, -1.0, 1.0);
  const double s1 = kraft_sum(g1, Penalty::zero()).sum;  // 3
  const double s2 = kraft_sum(g2, Penalty::zero()).sum;  // 5
  const AdaptiveL0 costs = build_adaptive_penalty({s1, s2});

  std::vector<Penalty::AdaptiveComponent> components;
  components.push_back({g1, std::make_shared<Penalty>(Penalty::zero())});
  components.push_back({g2, std::make_shared<Penalty>(Penalty::zero())});
  const Penalty adaptive = Penalty::adaptive(costs.l0, components);

  CHECK(adaptive.adaptive_value(1, vec1(0.0), 0) ==
        doctest::Approx(M_SQRT2 + 2.0 * std::log(3.0)).epsilon(1e-12));
  CHECK(adaptive.adaptive_value(2, vec1(0.5), 3) ==
        doctest::Approx(2.0 * M_SQRT2 + 2.0 * std::log(5.0)).epsilon(1e-12));
  CHECK_THROWS_AS(adaptive.adaptive_value(3, vec1(0.0), 0), DomainError);
  CHECK_THROWS_AS(adaptive.at(vec1(0.0), 0), DomainError);

  // The class-level half-exponent sum collapses to the geometric series.
  CompensatedSum class_sum;
  for (std::size_t k = 1; k <= 2; ++k) {
    const EpsGrid& grid = components[k - 1].grid;
    const auto points = enumerate_points(grid);
    for (std::size_t i = 0; i < points.size(); ++i) {
      class_sum.add(std::exp(-0.5 * adaptive.adaptive_value(
                                        static_cast<int>(k), points[i], i)));
    }
  }
  const double expected = std::exp(-1.0 / M_SQRT2) + std::exp(-2.0 / M_SQRT2);
  CHECK(class_sum.value() == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("pseudo-penalty tables") {
  const EpsGrid g = grid1d(0.0, 1.0, -2.0, 2.0);
  const auto points = enumerate_points(g);
  const Penalty penalty = Penalty::squared_norm();

  const auto quad = pseudo_values(PseudoPenalty::quadratic(2.0, vec1(1.0)),
                                  points, penalty);
  CHECK(quad[0] == doctest::Approx(2.0 * 9.0));  // theta = -2
  CHECK(quad[3] == doctest::Approx(0.0));        // theta = 1

  const auto scaled = pseudo_values(PseudoPenalty::alpha_times_penalty(0.5),
                                    points, penalty);
  CHECK(scaled[0] == doctest::Approx(2.0));  // 0.5 * ||-2||^2

  const Model gauss = Model::gaussian_location(1);
  const Vector truth = vec1(0.0);
  PseudoContext ctx{&gauss, &truth, 10.0};
  const auto bhat = pseudo_values(PseudoPenalty::alpha_bhattacharyya(0.5),
                                  points, penalty, ctx);
  // alpha n D_B(P, P_theta) = 0.5 * 10 * theta^2 / 4.
  CHECK(bhat[0] == doctest::Approx(5.0 * 4.0 / 4.0).epsilon(1e-12));
  CHECK(bhat[2] == doctest::Approx(0.0));

  CHECK_THROWS_AS(PseudoPenalty::alpha_bhattacharyya(1.5), DomainError);
  CHECK_THROWS_AS(PseudoPenalty::quadratic(-1.0, vec1(0.0)), DomainError);
  CHECK_THROWS_AS(
      pseudo_values(PseudoPenalty::table({1.0}), points, penalty),
      DomainError);
}

TEST_CASE("empty and invalid samples are rejected") {
  const Model gauss = Model::gaussian_location(1);
  const EpsGrid g = grid1d(0.0, 1.0, -1.0, 1.0);
  Matrix empty(0, 1);
  CHECK_THROWS_AS(
      penalized_mle(gauss, g, Penalty::zero(), DataSample{empty, std::nullopt}),
      DomainError);
}

TEST_CASE("an everywhere-infinite objective is an error") {
  const Model gauss = Model::gaussian_location(1);
  const EpsGrid g = grid1d(0.0, 1.0, -1.0, 1.0);
  const double inf = std::numeric_limits<double>::infinity();
  const Penalty penalty = Penalty::table({inf, inf, inf});
  CHECK_THROWS_AS(penalized_mle(gauss, g, penalty, external_sample({0.5})),
                  Error);
}
