#include "resolv/bounds.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace resolv {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void push(BoundCertificate& cert, const std::string& name,
          AssumptionStatus status, const std::string& detail = "") {
  cert.assumptions.push_back(Assumption{name, status, detail});
}

void push_provenance(BoundCertificate& cert, const std::string& what,
                     Provenance p) {
  push(cert, what + " provenance",
       p == Provenance::Exact ? AssumptionStatus::Checked
                              : AssumptionStatus::AssertedByCaller,
       to_string(p));
  if (p == Provenance::MonteCarlo) cert.params["empirical"] = 1.0;
}

double finalize(BoundCertificate& cert) {
  CompensatedSum total;
  for (const auto& [name, v] : cert.components) total.add(v);
  cert.value = total.value();
  return cert.value;
}

double largest_eigenvalue(const Matrix& m) {
  if (m.rows() == 1) return m(0, 0);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

}  // namespace

const char* to_string(AssumptionStatus status) {
  switch (status) {
    case AssumptionStatus::Checked:
      return "checked";
    case AssumptionStatus::Failed:
      return "failed";
    case AssumptionStatus::AssertedByCaller:
      return "asserted-by-caller";
  }
  return "?";
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::Exact:
      return "exact";
    case Provenance::AnalyticBound:
      return "analytic-bound";
    case Provenance::MonteCarlo:
      return "mc-estimate";
  }
  return "?";
}

double BoundCertificate::reassembled() const {
  CompensatedSum total;
  for (const auto& [name, v] : components) total.add(v);
  return total.value();
}

bool BoundCertificate::empirical() const {
  const auto it = params.find("empirical");
  return it != params.end() && it->second != 0.0;
}

Resolvability resolvability_index(
    const std::vector<Vector>& points, const Penalty& penalty,
    const std::function<double(const Vector&)>& kl_oracle, double n) {
  if (points.empty()) throw DomainError("resolvability_index: empty grid");
  Resolvability out;
  out.value = kInf;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double v = kl_oracle(points[i]) + penalty.at(points[i], i) / n;
    if (v < out.value) {
      out.value = v;
      out.minimizer = points[i];
      out.index = i;
      out.finite = std::isfinite(v);
    }
  }
  return out;
}

Resolvability resolvability_index(const Model& family, const EpsGrid& grid,
                                  const Penalty& penalty,
                                  const Vector& theta_true, double n) {
  const std::vector<Vector> points = enumerate_points(grid);
  return resolvability_index(
      points, penalty,
      [&](const Vector& theta) {
        return family.kl_divergence(theta_true, theta);
      },
      n);
}

double resolvability_taylor_bound(const Model& family,
                                  const Vector& theta_true,
                                  const Vector& theta, const Penalty& penalty,
                                  double eps, double n) {
  if (!penalty.twice_differentiable()) {
    throw DomainError("resolvability_taylor_bound: penalty is not twice "
                      "continuously differentiable");
  }
  const int d = family.dim();
  const double delta = eps * std::sqrt(double(d));

  // sup over the ball of the largest eigenvalue of I_P + hess(penalty)/n,
  // taken over a mesh of the ball's bounding box. The built-in
  // cross-information matrices are monotone per axis.
  constexpr int kMesh = 101;
  double sup_eig = 0.0;
  std::vector<long> idx(d, 0);
  Vector probe(d);
  bool done = false;
  while (!done) {
    for (int j = 0; j < d; ++j) {
      const double t = static_cast<double>(idx[j]) / (kMesh - 1);
      probe[j] = theta[j] - delta + 2.0 * delta * t;
    }
    if ((probe - theta).norm() <= delta + 1e-12) {
      const Matrix m = fisher_cross_information(family, probe) +
                       penalty.hessian(probe) / n;
      sup_eig = std::max(sup_eig, largest_eigenvalue(m));
    }
    int j = 0;
    while (j < d && ++idx[j] == kMesh) {
      idx[j] = 0;
      ++j;
    }
    done = (j == d);
  }

  const double positive_part = std::max(sup_eig, 0.0);
  return family.kl_divergence(theta_true, theta) + penalty.at(theta, 0) / n +
         0.5 * eps * eps * d * positive_part;
}

BoundCertificate general_certificate(
    const std::vector<Vector>& points, const Penalty& penalty,
    const std::vector<double>& pseudo_table, ExpectationEstimate e_pseudo,
    std::optional<ExpectationEstimate> e_penalty, double resolvability,
    double n, SummationMode mode) {
  BoundCertificate cert;
  cert.theorem_id = mode == SummationMode::IncludePenalty
                        ? "penalized-risk"
                        : "penalized-risk-exclude-penalty";
  cert.params["n"] = n;
  cert.params["grid_points"] = static_cast<double>(points.size());

  if (pseudo_table.size() != points.size()) {
    throw DomainError("general_certificate: pseudo table does not cover the grid");
  }
  CompensatedSum acc;
  for (std::size_t i = 0; i < points.size(); ++i) {
    double exponent = pseudo_table[i];
    if (mode == SummationMode::IncludePenalty) {
      exponent += penalty.at(points[i], i);
    }
    acc.add(std::exp(-0.5 * exponent));
  }
  const double sum = acc.value();
  cert.params["half_exponent_sum"] = sum;

  push(cert, "countable model", AssumptionStatus::Checked,
       std::to_string(points.size()) + " grid points");
  push(cert, "penalized MLE exists", AssumptionStatus::Checked,
       "finite grid scan");
  push_provenance(cert, "E pseudo-penalty", e_pseudo.provenance);

  cert.components["resolvability"] = resolvability;
  if (!std::isfinite(sum) || sum <= 0.0) {
    push(cert, "finite half-exponent sum", AssumptionStatus::Failed,
         "sum = " + std::to_string(sum) + "; certificate is non-informative");
    cert.components["log_sum"] = kInf;
    finalize(cert);
    return cert;
  }
  push(cert, "finite half-exponent sum", AssumptionStatus::Checked);
  cert.components["log_sum"] = 2.0 * std::log(sum) / n;
  cert.components["pseudo_expectation"] = e_pseudo.value / n;
  if (mode == SummationMode::ExcludePenalty) {
    if (!e_penalty.has_value()) {
      throw DomainError("general_certificate: the exclude-penalty form needs "
                        "E penalty(estimate)");
    }
    push_provenance(cert, "E penalty", e_penalty->provenance);
    cert.components["penalty_expectation"] = -e_penalty->value / n;
  }
  finalize(cert);
  return cert;
}

BoundCertificate bhattacharyya_certificate(
    const EpsGrid& grid, const std::vector<Vector>& points,
    const Penalty& penalty, SummationMode mode, double alpha,
    const std::function<double(const Vector&)>& affinity, double resolvability,
    double n, std::optional<ExpectationEstimate> e_penalty,
    std::optional<double> envelope_c) {
  if (alpha < 0.0 || alpha >= 1.0) {
    throw DomainError("bhattacharyya_certificate: alpha must lie in [0, 1); "
                      "alpha = 1 divides by zero");
  }
  BoundCertificate cert;
  cert.theorem_id = mode == SummationMode::IncludePenalty
                        ? "bhattacharyya-pseudo"
                        : "bhattacharyya-pseudo-exclude-penalty";
  cert.params["n"] = n;
  cert.params["alpha"] = alpha;
  push(cert, "alpha in [0, 1)", AssumptionStatus::Checked);

  double sum;
  if (envelope_c.has_value()) {
    // Affinity dominated by exp(-c ||theta - theta*||^2): the summation of
    // A^(alpha n) is at most the off-peak Gaussian lattice bound at
    // exponent alpha n c.
    if (!(*envelope_c > 0.0)) {
      throw DomainError("bhattacharyya_certificate: envelope c must be positive");
    }
    if (mode == SummationMode::IncludePenalty &&
        penalty.kind() != Penalty::Kind::Zero) {
      throw DomainError("bhattacharyya_certificate: the envelope path drops "
                        "the penalty from the summation; use the exact path");
    }
    sum = gaussian_sum_bound(grid.eps, alpha * n * *envelope_c, grid.dim,
                             /*peak_on_grid=*/false);
    cert.params["envelope_c"] = *envelope_c;
    push(cert, "affinity gaussian envelope", AssumptionStatus::AssertedByCaller,
         "summation path: gaussian envelope");
  } else {
    CompensatedSum acc;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double a = affinity(points[i]);
      if (!(a > 0.0) || a > 1.0 + 1e-12) {
        throw DomainError("bhattacharyya_certificate: affinity value " +
                          std::to_string(a) + " outside (0, 1]");
      }
      double term = std::pow(a, alpha * n);
      if (mode == SummationMode::IncludePenalty) {
        term *= std::exp(-0.5 * penalty.at(points[i], i));
      }
      acc.add(term);
    }
    sum = acc.value();
    push(cert, "affinity values in (0, 1]", AssumptionStatus::Checked,
         "summation path: exact over " + std::to_string(points.size()) +
             " points");
  }
  cert.params["affinity_power_sum"] = sum;

  const double inflation = 1.0 / (1.0 - alpha);
  cert.components["resolvability"] = inflation * resolvability;
  cert.components["log_sum"] = inflation * 2.0 * std::log(sum) / n;
  if (mode == SummationMode::ExcludePenalty) {
    if (!e_penalty.has_value()) {
      throw DomainError("bhattacharyya_certificate: the exclude-penalty form "
                        "needs E penalty(estimate)");
    }
    push_provenance(cert, "E penalty", e_penalty->provenance);
    cert.components["penalty_expectation"] = -inflation * e_penalty->value / n;
  }
  finalize(cert);
  return cert;
}

BoundCertificate gaussian_decay_certificate(double eps, int d, double n,
                                            double c, double resolvability,
                                            ExpectationEstimate e_penalty,
                                            AssumptionStatus c_status) {
  if (!(c > 0.0)) {
    throw DomainError("gaussian_decay_certificate: c must be positive");
  }
  BoundCertificate cert;
  cert.theorem_id = "gaussian-decay";
  cert.params["n"] = n;
  cert.params["eps"] = eps;
  cert.params["d"] = d;
  cert.params["c"] = c;
  push(cert, "affinity gaussian envelope", c_status,
       "A <= exp(-c ||theta - theta*||^2) with c = " + std::to_string(c));
  push(cert, "c > 0", AssumptionStatus::Checked);
  push_provenance(cert, "E penalty", e_penalty.provenance);

  const double log_arg =
      1.0 + 2.0 * std::sqrt(2.0 * M_PI) / (eps * std::sqrt(n * c));
  cert.components["resolvability"] = 2.0 * resolvability;
  cert.components["log_sum"] = 4.0 * d * std::log(log_arg) / n;
  cert.components["penalty_expectation"] = -2.0 * e_penalty.value / n;
  finalize(cert);
  return cert;
}

BoundCertificate gaussian_decay_concrete_certificate(
    int d, double n, double c, double kl_to_grid, AssumptionStatus c_status) {
  if (!(c > 0.0)) {
    throw DomainError("gaussian_decay_concrete_certificate: c must be positive");
  }
  BoundCertificate cert;
  cert.theorem_id = "gaussian-decay-concrete";
  cert.params["n"] = n;
  cert.params["d"] = d;
  cert.params["c"] = c;
  push(cert, "affinity gaussian envelope", c_status,
       "A <= exp(-c ||theta - theta*||^2) with c = " + std::to_string(c));
  push(cert, "eps = sqrt(2/n)", AssumptionStatus::Checked);
  push(cert, "penalty = 0", AssumptionStatus::Checked);

  cert.components["kl_to_grid"] = 2.0 * kl_to_grid;
  cert.components["log_term"] =
      4.0 * d * std::log(1.0 + 4.0 / std::sqrt(c)) / n;
  finalize(cert);
  return cert;
}

BoundCertificate minimax_certificate(double beta, double c, int d, double n) {
  if (!(beta > 0.0) || !(c > 0.0)) {
    throw DomainError("minimax_certificate: beta and c must be positive");
  }
  BoundCertificate cert;
  cert.theorem_id = "minimax-gaussian-decay";
  cert.params["n"] = n;
  cert.params["beta"] = beta;
  cert.params["c"] = c;
  cert.params["d"] = d;
  push(cert, "every eps-discretization is a KL-net of radius beta eps^2",
       AssumptionStatus::AssertedByCaller);
  push(cert, "affinity gaussian envelope uniform over the model",
       AssumptionStatus::AssertedByCaller);

  cert.components["net_radius"] = 4.0 * beta / n;
  cert.components["log_term"] =
      4.0 * d * std::log(1.0 + 4.0 / std::sqrt(c)) / n;
  finalize(cert);
  return cert;
}

BoundCertificate mixed_regime_certificate(double eps, int d, double n,
                                          double c, double a, double b,
                                          double radius, double resolvability,
                                          ExpectationEstimate e_penalty) {
  const double a_root = std::pow(a, 1.0 / b);
  if (!(radius >= std::max(11.0 * a_root, 3.0 * eps))) {
    throw HypothesisError(
        "R >= 11 a^{1/b} v 3 eps",
        "R = " + std::to_string(radius) + ", 11 a^{1/b} = " +
            std::to_string(11.0 * a_root) + ", 3 eps = " +
            std::to_string(3.0 * eps));
  }
  if (!(n >= 2.0 * (d + 1) / b)) {
    throw HypothesisError("n >= 2(d+1)/b",
                          "n = " + std::to_string(n) + ", 2(d+1)/b = " +
                              std::to_string(2.0 * (d + 1) / b));
  }
  if (!(c > 0.0)) throw DomainError("mixed_regime_certificate: c <= 0");

  BoundCertificate cert;
  cert.theorem_id = "gaussian-center-power-tail";
  cert.params["n"] = n;
  cert.params["eps"] = eps;
  cert.params["d"] = d;
  cert.params["c"] = c;
  cert.params["a"] = a;
  cert.params["b"] = b;
  cert.params["R"] = radius;
  push(cert, "R >= 11 a^{1/b} v 3 eps", AssumptionStatus::Checked);
  push(cert, "n >= 2(d+1)/b", AssumptionStatus::Checked);
  push(cert, "affinity gaussian bound inside the ball",
       AssumptionStatus::AssertedByCaller);
  push(cert, "affinity power bound outside the ball",
       AssumptionStatus::AssertedByCaller);
  push_provenance(cert, "E penalty", e_penalty.provenance);

  const double center_arg =
      1.0 + 2.0 * std::sqrt(2.0 * M_PI) / (eps * std::sqrt(n * c));
  const double tail_arg =
      1.0 + 4.0 * M_SQRT2 * radius / (eps * std::sqrt(n * b));
  cert.components["resolvability"] = 2.0 * resolvability;
  cert.components["gaussian_center"] = 4.0 * d * std::log(center_arg) / n;
  cert.components["power_tail"] = 4.0 * d * std::log(tail_arg) / n;
  cert.components["log_sum_constant"] = 6.0 / n;
  cert.components["penalty_expectation"] = -2.0 * e_penalty.value / n;
  finalize(cert);
  return cert;
}

BoundCertificate squared_norm_certificate(double eps, int d, double n,
                                          double c, double a, double b,
                                          double radius,
                                          double theta_star_norm,
                                          double resolvability_sqnorm) {
  const double a_root = std::pow(a, 1.0 / b);
  if (!(radius >= std::max(11.0 * a_root, 3.0 * eps))) {
    throw HypothesisError(
        "R >= 11 a^{1/b} v 3 eps",
        "R = " + std::to_string(radius) + ", 11 a^{1/b} = " +
            std::to_string(11.0 * a_root) + ", 3 eps = " +
            std::to_string(3.0 * eps));
  }
  if (!(c > 0.0)) throw DomainError("squared_norm_certificate: c <= 0");

  BoundCertificate cert;
  cert.theorem_id = "squared-norm-any-n";
  cert.params["n"] = n;
  cert.params["eps"] = eps;
  cert.params["d"] = d;
  cert.params["c"] = c;
  cert.params["a"] = a;
  cert.params["b"] = b;
  cert.params["R"] = radius;
  cert.params["theta_star_norm"] = theta_star_norm;
  push(cert, "R >= 11 a^{1/b} v 3 eps", AssumptionStatus::Checked);
  push(cert, "penalty = ||theta||^2", AssumptionStatus::AssertedByCaller);
  push(cert, "affinity gaussian bound inside the ball",
       AssumptionStatus::AssertedByCaller);
  push(cert, "affinity power bound outside the ball",
       AssumptionStatus::AssertedByCaller);
  push(cert, "any n >= 1: tail handled by the three sample-size regimes",
       AssumptionStatus::Checked);

  const double center_arg =
      1.0 + 2.0 * std::sqrt(2.0 * M_PI) / (eps * std::sqrt(n * c));
  const double tail_arg =
      1.0 + (29.0 * std::sqrt(double(d)) + 6.0 * radius) /
                (eps * std::sqrt(n * b));
  cert.components["resolvability"] = 2.0 * resolvability_sqnorm;
  cert.components["gaussian_center"] = 4.0 * d * std::log(center_arg) / n;
  cert.components["power_tail"] = 4.0 * d * std::log(tail_arg) / n;
  cert.components["log_sum_constant"] =
      4.0 * std::log(2.0 + 2.0 * 22.0 / (radius * radius * radius)) / n;
  cert.components["center_norm"] =
      2.0 * theta_star_norm * theta_star_norm / n;
  cert.components["constant"] = 8.0 / n;
  finalize(cert);
  return cert;
}

BoundCertificate entropy_certificate(double resolvability, double h_bound,
                                     ExpectationEstimate e_penalty, double n,
                                     const std::string& h_provenance) {
  BoundCertificate cert;
  cert.theorem_id = "entropy";
  cert.params["n"] = n;
  cert.params["h_bound"] = h_bound;
  push(cert, "H bound provenance", AssumptionStatus::AssertedByCaller,
       h_provenance);
  push_provenance(cert, "E penalty", e_penalty.provenance);
  if (h_provenance == "mc-estimate") cert.params["empirical"] = 1.0;

  cert.components["resolvability"] = resolvability;
  cert.components["entropy_term"] = 2.0 * h_bound / n;
  cert.components["penalty_expectation"] = -e_penalty.value / n;
  finalize(cert);
  return cert;
}

double estimator_entropy_bound(double eps, int d, double c, double radius) {
  if (!(eps > 0.0) || !(c > 0.0) || radius < 0.0 || d < 1) {
    throw DomainError("estimator_entropy_bound: need eps, c > 0, R >= 0");
  }
  const double spread = std::max({1.0 / std::sqrt(c), radius, 3.0 * eps});
  return 0.5 * d * std::pow(4.0 * std::sqrt(M_PI) / (eps * std::sqrt(c)), d) +
         d * std::log(1.0 + 2.0 * spread / eps);
}

BoundCertificate quadratic_certificate(double eps, int d, double alpha,
                                       ExpectationEstimate var_hat,
                                       ExpectationEstimate e_penalty,
                                       double resolvability, double n) {
  if (!(alpha > 0.0)) {
    throw DomainError("quadratic_certificate: alpha = 0 makes the log term "
                      "diverge");
  }
  if (var_hat.value < 0.0) {
    throw DomainError("quadratic_certificate: negative variance");
  }
  BoundCertificate cert;
  cert.theorem_id = "quadratic-pseudo";
  cert.params["n"] = n;
  cert.params["eps"] = eps;
  cert.params["d"] = d;
  cert.params["alpha"] = alpha;
  push(cert, "alpha > 0", AssumptionStatus::Checked);
  push_provenance(cert, "estimator variance", var_hat.provenance);
  push_provenance(cert, "E penalty", e_penalty.provenance);

  cert.components["resolvability"] = resolvability;
  cert.components["log_sum"] =
      2.0 * d * std::log(1.0 + 2.0 * std::sqrt(M_PI) / (eps * std::sqrt(alpha))) /
      n;
  cert.components["variance_term"] = alpha * var_hat.value / n;
  cert.components["penalty_expectation"] = -e_penalty.value / n;
  finalize(cert);
  return cert;
}

BoundCertificate penalty_pseudo_certificate(const std::vector<Vector>& points,
                                            const Penalty& penalty,
                                            double alpha,
                                            ExpectationEstimate e_penalty,
                                            double resolvability, double n) {
  if (alpha < 0.0) {
    throw DomainError("penalty_pseudo_certificate: alpha must be >= 0");
  }
  const bool map_mode = alpha == 1.0 &&
                        penalty.kind() == Penalty::Kind::Codelength &&
                        penalty.codelength_mode() == CodelengthMode::LogReciprocal;

  BoundCertificate cert;
  cert.theorem_id = map_mode ? "map" : "penalty-pseudo";
  cert.params["n"] = n;
  cert.params["alpha"] = alpha;
  push(cert, "alpha >= 0", AssumptionStatus::Checked);
  push_provenance(cert, "E penalty", e_penalty.provenance);

  CompensatedSum acc;
  for (std::size_t i = 0; i < points.size(); ++i) {
    acc.add(std::exp(-0.5 * (alpha + 1.0) * penalty.at(points[i], i)));
  }
  const double sum = acc.value();
  cert.params["half_exponent_sum"] = sum;
  if (map_mode) {
    // With a normalized prior the summation telescopes to 1.
    push(cert, "prior pmf normalized", AssumptionStatus::Checked,
         "sum = " + std::to_string(sum));
  }
  if (!std::isfinite(sum) || sum <= 0.0) {
    push(cert, "finite half-exponent sum", AssumptionStatus::Failed,
         "sum = " + std::to_string(sum) + "; certificate is non-informative");
    cert.components["resolvability"] = resolvability;
    cert.components["log_sum"] = kInf;
    finalize(cert);
    return cert;
  }
  cert.components["resolvability"] = resolvability;
  cert.components["log_sum"] = 2.0 * std::log(sum) / n;
  cert.components["penalty_expectation"] = alpha * e_penalty.value / n;
  finalize(cert);
  return cert;
}

double tail_probability_bound(double t, double n, double kraft_like_sum) {
  if (t < 0.0) throw DomainError("tail_probability_bound: t must be >= 0");
  if (kraft_like_sum < 0.0) {
    throw DomainError("tail_probability_bound: negative sum");
  }
  return std::min(1.0, std::exp(-n * t / 2.0) * kraft_like_sum);
}

}  // namespace resolv
