// Acceptance suite: one test case per criterion, with a printed
// "[criterion N] PASS/FAIL" line and the measured numbers.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>

#include "resolv/experiment.hpp"
#include "resolv/verify.hpp"

using namespace resolv;

namespace {

Vector vec1(double x) { return Vector::Constant(1, x); }

EpsGrid grid_about_origin(int d, double eps, double half_width) {
  return EpsGrid::make(Vector::Zero(d), eps, Box::centered(d, half_width));
}

double seconds_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[criterion %d] %s  %s\n", criterion, pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
}

constexpr std::uint64_t kSeed = 20250810;

}  // namespace

TEST_CASE("criterion 1: certificate soundness for the gaussian experiments") {
  bool all_pass = true;
  std::string detail;
  for (int d : {1, 2}) {
    const Model model = Model::gaussian_location(d);
    const Vector truth = Vector::Zero(d);
    for (int n : {25, 100, 400}) {
      const auto start = std::chrono::steady_clock::now();
      const double eps = std::sqrt(2.0 / n);
      const EpsGrid grid = grid_about_origin(d, eps, 3.0);
      RiskReport rep = mc_risk(model, truth, grid, Penalty::zero(), n, 2000,
                               derive_seed(kSeed, 100 * d + n));
      const BoundCertificate cert = gaussian_decay_concrete_certificate(
          d, n, 0.125, 0.0, AssumptionStatus::Checked);
      compare_certificates(rep, {cert});
      const double elapsed = seconds_since(start);

      const bool pass = rep.comparisons[0].satisfied && elapsed <= 60.0;
      all_pass = all_pass && pass;
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    "d=%d n=%d risk+3se=%.6f cert=%.6f (%.1fs)", d, n,
                    rep.mc_risk + 3.0 * rep.stderr_, cert.value, elapsed);
      detail += std::string("\n    ") + buf;
      CHECK(rep.comparisons[0].satisfied);
      CHECK(elapsed <= 60.0);
    }
  }
  // The worked constant: 4 d log(1 + 4 sqrt 8)/n at d = 1, n = 100.
  const double worked =
      gaussian_decay_concrete_certificate(1, 100, 0.125, 0.0,
                                          AssumptionStatus::Checked)
          .value;
  CHECK(std::abs(worked - 0.100431) < 1e-5);
  report(1, all_pass, "MC risk + 3 stderr <= concrete certificate" + detail);
}

TEST_CASE("criterion 2: exponential-family affinity exactness") {
  Rng rng(kSeed);
  const Model gauss = Model::gaussian_location(1);
  const Model bern = Model::bernoulli_natural();
  double worst_quad = 0.0;
  double worst_equality = 0.0;
  for (int i = 0; i < 100; ++i) {
    const bool use_gauss = i % 2 == 0;
    const Model& model = use_gauss ? gauss : bern;
    const double radius = use_gauss ? 3.0 : 1.0;
    const Vector a = vec1(rng.uniform(-radius, radius));
    const Vector b = vec1(rng.uniform(-radius, radius));
    const double closed = model.hellinger_affinity(a, b);
    const double quad = quadrature_affinity(model, a, b).value;
    worst_quad = std::max(worst_quad, std::abs(closed - quad));
    if (use_gauss) {
      const double envelope = std::exp(-0.125 * (a - b).squaredNorm());
      worst_equality = std::max(worst_equality, std::abs(closed - envelope));
    }
  }
  const bool pass = worst_quad < 1e-6 && worst_equality < 1e-12;
  CHECK(worst_quad < 1e-6);
  CHECK(worst_equality < 1e-12);
  char buf[140];
  std::snprintf(buf, sizeof(buf),
                "closed vs quadrature %.3g (tol 1e-6); gaussian envelope "
                "equality %.3g (tol 1e-12)",
                worst_quad, worst_equality);
  report(2, pass, buf);
}

TEST_CASE("criterion 3: grid-summation lemma dominance, 500 configurations") {
  const auto start = std::chrono::steady_clock::now();
  // 8 check families x 63 draws = 504 admissible configurations.
  const LemmaCheckLedger ledger = grid_summation_checks(kSeed, 63);
  const double elapsed = seconds_since(start);
  int configs = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (const LemmaCheck& check : ledger.checks) {
    configs += check.trials;
    worst = std::min(worst, check.worst_margin);
    CHECK(check.failures == 0);
  }
  const bool pass =
      ledger.total_failures() == 0 && configs >= 500 && elapsed <= 120.0;
  CHECK(configs >= 500);
  CHECK(elapsed <= 120.0);
  char buf[140];
  std::snprintf(buf, sizeof(buf),
                "%d configurations, 0 violations, worst slack %.3g (%.1fs)",
                configs, worst, elapsed);
  report(3, pass, buf);
}

TEST_CASE("criterion 4: probabilistic tail bound at t = 0.2") {
  const Model model = Model::gaussian_location(1);
  const EpsGrid grid = grid_about_origin(1, 0.1, 5.0);  // 101 points
  const Penalty penalty = Penalty::codelength(
      std::vector<double>(101, 1.0 / 101.0), CodelengthMode::TwiceLogReciprocal);
  const TailFrequencyReport rep = mc_tail_frequency(
      model, vec1(0.0), grid, penalty, nullptr, 100, 0.2, 10000, kSeed);
  const bool pass = rep.satisfied && rep.exceedances == 0 &&
                    std::abs(rep.kraft_like_sum - 1.0) < 1e-9;
  CHECK(std::abs(rep.kraft_like_sum - 1.0) < 1e-9);
  CHECK(rep.bound == doctest::Approx(4.54e-5).epsilon(1e-3));
  CHECK(rep.exceedances == 0);
  CHECK(rep.satisfied);
  char buf[140];
  std::snprintf(buf, sizeof(buf),
                "%d exceedances in %d replicates against bound %.3g",
                rep.exceedances, rep.reps, rep.bound);
  report(4, pass, buf);
}

TEST_CASE("criterion 5: exact 1/n scaling and monotone risk") {
  const Model model = Model::gaussian_location(1);
  const Vector truth = Vector::Zero(1);
  double reference = 0.0;
  double worst_scaling = 0.0;
  std::vector<double> risks;
  for (int n : {25, 100, 400, 1600}) {
    const double eps = std::sqrt(2.0 / n);
    const BoundCertificate cert = gaussian_decay_concrete_certificate(
        1, n, 0.125, 0.0, AssumptionStatus::Checked);
    const double scaled = cert.value * n;
    if (reference == 0.0) reference = scaled;
    worst_scaling = std::max(worst_scaling, std::abs(scaled - reference));

    const EpsGrid grid = grid_about_origin(1, eps, 3.0);
    const RiskReport rep = mc_risk(model, truth, grid, Penalty::zero(), n,
                                   2000, derive_seed(kSeed, n));
    risks.push_back(rep.mc_risk);
  }
  bool monotone = true;
  for (std::size_t i = 1; i < risks.size(); ++i) {
    monotone = monotone && risks[i] < risks[i - 1];
  }
  const bool pass = worst_scaling <= 1e-12 && monotone;
  CHECK(worst_scaling <= 1e-12);
  CHECK(monotone);
  char buf[180];
  std::snprintf(buf, sizeof(buf),
                "certificate*n constant to %.2g; risks %.5f > %.5f > %.5f > "
                "%.5f",
                worst_scaling, risks[0], risks[1], risks[2], risks[3]);
  report(5, pass, buf);
}

TEST_CASE("criterion 6: lemma oracle suite at 1000 trials") {
  const LemmaRunResult result = run_verify_lemmas(kSeed, 1000);
  const int failures = result.report["total_failures"].get<int>();
  CHECK(failures == 0);
  CHECK(result.exit_code == 0);

  // The worked Laplace instances behind the suite's median and
  // first-moment checks.
  const Model laplace = Model::laplace_location(1);
  const double unit_affinity =
      laplace.hellinger_affinity(vec1(0.0), vec1(1.0));
  const double z = 0.5 - 0.5 * std::exp(-1.0);
  const double median_bound = std::exp(-0.5 * z * z);
  CHECK(std::abs(unit_affinity - 0.909796) < 1e-6);
  CHECK(unit_affinity <= median_bound);

  const double far_affinity = laplace.hellinger_affinity(vec1(0.0), vec1(8.0));
  CHECK(std::abs(far_affinity - 0.091578) < 1e-6);
  CHECK(far_affinity <= 0.5);

  const bool pass = failures == 0 && unit_affinity <= median_bound &&
                    far_affinity <= 0.5;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "0 failures; A=%.6f <= %.6f (median), A=%.6f <= 0.5 "
                "(first moments)",
                unit_affinity, median_bound, far_affinity);
  report(6, pass, buf);
}

TEST_CASE("criterion 7: minimax formula and uniform-over-truth risk") {
  const BoundCertificate cert = minimax_certificate(0.125, 0.125, 1, 100.0);
  CHECK(std::abs(cert.value - 0.105431) < 1e-5);
  CHECK(cert.value == doctest::Approx(0.10542852615533612).epsilon(1e-12));

  const Model model = Model::gaussian_location(1);
  const int n = 100;
  const double eps = std::sqrt(2.0 / n);
  const EpsGrid grid = grid_about_origin(1, eps, 3.0);

  Rng rng(kSeed + 7);
  bool all_below = true;
  double worst = 0.0;
  for (int i = 0; i < 12; ++i) {
    Vector truth = vec1(rng.uniform(-2.0, 2.0));
    if (i % 2 == 0) truth = nearest_point(grid, truth);  // on-grid half
    RiskReport rep = mc_risk(model, truth, grid, Penalty::zero(), n, 1000,
                             derive_seed(kSeed, 1000 + i));
    const double conservative = rep.mc_risk + 3.0 * rep.stderr_;
    worst = std::max(worst, conservative);
    all_below = all_below && conservative <= cert.value;
    CHECK(conservative <= cert.value);
  }
  char buf[140];
  std::snprintf(buf, sizeof(buf),
                "minimax certificate %.6f; worst risk+3se over 12 truths %.6f",
                cert.value, worst);
  report(7, all_below, buf);
}

TEST_CASE("criterion 8: MAP bound with a uniform prior") {
  const Model model = Model::gaussian_location(1);
  const int n = 100;
  const EpsGrid grid = grid_about_origin(1, 0.1, 5.0);  // 101 points
  const auto points = enumerate_points(grid);
  REQUIRE(points.size() == 101);

  const Penalty prior = Penalty::codelength(
      std::vector<double>(101, 1.0 / 101.0), CodelengthMode::LogReciprocal);
  const Resolvability res =
      resolvability_index(model, grid, prior, vec1(0.0), n);
  const BoundCertificate cert = penalty_pseudo_certificate(
      points, prior, 1.0, ExpectationEstimate{std::log(101.0), Provenance::Exact},
      res.value, n);

  const double expected = res.value + std::log(101.0) / n;
  const bool exact = std::abs(cert.value - expected) <= 1e-12;
  CHECK(exact);

  RiskReport rep =
      mc_risk(model, vec1(0.0), grid, prior, n, 2000, derive_seed(kSeed, 8));
  compare_certificates(rep, {cert});
  const bool satisfied = rep.comparisons[0].satisfied;
  CHECK(satisfied);

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "certificate %.6f = resolvability + log(101)/n exactly; "
                "risk+3se %.6f",
                cert.value, rep.mc_risk + 3.0 * rep.stderr_);
  report(8, exact && satisfied, buf);
}
