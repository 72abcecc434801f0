#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "resolv/estimator.hpp"
#include "resolv/grid.hpp"
#include "resolv/models.hpp"

namespace resolv {

enum class AssumptionStatus { Checked, Failed, AssertedByCaller };
const char* to_string(AssumptionStatus status);

struct Assumption {
  std::string name;
  AssumptionStatus status = AssumptionStatus::Checked;
  std::string detail;
};

enum class Provenance { Exact, AnalyticBound, MonteCarlo };
const char* to_string(Provenance p);

/// A plugged-in expectation (E of penalty, pseudo-penalty, variance, ...)
/// with a record of where the number came from.
struct ExpectationEstimate {
  double value = 0.0;
  Provenance provenance = Provenance::Exact;
};

/// Risk-bound certificate. `value` always equals the sum of `components`;
/// every hypothesis of the source bound appears in `assumptions`, either
/// checked here or asserted by the caller.
struct BoundCertificate {
  std::string theorem_id;
  double value = 0.0;
  std::map<std::string, double> components;
  std::vector<Assumption> assumptions;
  std::map<std::string, double> params;

  double reassembled() const;
  /// True if any ingredient was a Monte Carlo estimate.
  bool empirical() const;
};

struct Resolvability {
  double value = 0.0;
  bool finite = false;
  Vector minimizer;
  std::size_t index = 0;
};

/// inf over the grid of KL(P || P_theta) + penalty(theta)/n, with minimizer.
Resolvability resolvability_index(const Model& family, const EpsGrid& grid,
                                  const Penalty& penalty,
                                  const Vector& theta_true, double n);
Resolvability resolvability_index(
    const std::vector<Vector>& points, const Penalty& penalty,
    const std::function<double(const Vector&)>& kl_oracle, double n);

/// Second-order upper bound on the resolvability index at a parameter in the
/// grid's convex hull: KL + penalty/n + (eps^2 d / 2) sup of the positive
/// part of the largest eigenvalue of (cross-information + penalty Hessian/n)
/// over the ball of radius eps sqrt(d).
double resolvability_taylor_bound(const Model& family,
                                  const Vector& theta_true,
                                  const Vector& theta, const Penalty& penalty,
                                  double eps, double n);

enum class SummationMode { IncludePenalty, ExcludePenalty };

BoundCertificate general_certificate(
    const std::vector<Vector>& points, const Penalty& penalty,
    const std::vector<double>& pseudo_table, ExpectationEstimate e_pseudo,
    std::optional<ExpectationEstimate> e_penalty, double resolvability,
    double n, SummationMode mode);

/// Risk bound with the affinity-power pseudo-penalty; summation either exact
/// over the grid or through a Gaussian envelope with constant envelope_c.
BoundCertificate bhattacharyya_certificate(
    const EpsGrid& grid, const std::vector<Vector>& points,
    const Penalty& penalty, SummationMode mode, double alpha,
    const std::function<double(const Vector&)>& affinity, double resolvability,
    double n, std::optional<ExpectationEstimate> e_penalty,
    std::optional<double> envelope_c = std::nullopt);

BoundCertificate gaussian_decay_certificate(double eps, int d, double n,
                                            double c, double resolvability,
                                            ExpectationEstimate e_penalty,
                                            AssumptionStatus c_status);

/// The eps = sqrt(2/n), zero-penalty instantiation:
///   2 D(P || grid) + 4 d log(1 + 4/sqrt(c)) / n.
BoundCertificate gaussian_decay_concrete_certificate(
    int d, double n, double c, double kl_to_grid, AssumptionStatus c_status);

/// Minimax risk bound 4 [beta + d log(1 + 4/sqrt(c))] / n for models whose
/// discretizations are KL-nets of radius beta eps^2.
BoundCertificate minimax_certificate(double beta, double c, int d, double n);

/// Gaussian affinity bound near the center, power decay in the tail;
/// requires R >= 11 a^{1/b} v 3 eps and n >= 2(d+1)/b.
BoundCertificate mixed_regime_certificate(double eps, int d, double n,
                                          double c, double a, double b,
                                          double radius, double resolvability,
                                          ExpectationEstimate e_penalty);

/// Same affinity hypotheses with the squared-norm penalty; no sample-size
/// gate.
BoundCertificate squared_norm_certificate(double eps, int d, double n,
                                          double c, double a, double b,
                                          double radius,
                                          double theta_star_norm,
                                          double resolvability_sqnorm);

BoundCertificate entropy_certificate(double resolvability, double h_bound,
                                     ExpectationEstimate e_penalty, double n,
                                     const std::string& h_provenance);

/// Entropy bound for a grid-valued estimator whose off-ball point
/// probabilities decay like exp(-c ||theta - theta*||^2).
double estimator_entropy_bound(double eps, int d, double c, double radius);

BoundCertificate quadratic_certificate(double eps, int d, double alpha,
                                       ExpectationEstimate var_hat,
                                       ExpectationEstimate e_penalty,
                                       double resolvability, double n);

/// Pseudo-penalty proportional to the penalty itself; alpha = 1 with a
/// log-reciprocal-prior penalty is the MAP bound.
BoundCertificate penalty_pseudo_certificate(const std::vector<Vector>& points,
                                            const Penalty& penalty,
                                            double alpha,
                                            ExpectationEstimate e_penalty,
                                            double resolvability, double n);

/// min(1, exp(-n t / 2) * kraft_like_sum).
double tail_probability_bound(double t, double n, double kraft_like_sum);

}  // namespace resolv
