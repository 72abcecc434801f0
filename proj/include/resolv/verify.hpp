#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "resolv/bounds.hpp"
#include "resolv/estimator.hpp"

namespace resolv {

/// Parallelism cap from RESOLV_THREADS (default 1). Results never depend on
/// it: replicate streams are seeded independently and reduced in index order.
int thread_cap();

struct CertificateComparison {
  std::string certificate_id;
  double value = 0.0;
  bool satisfied = false;  // mc_risk + 3 stderr <= value
  double margin = 0.0;     // value - (mc_risk + 3 stderr)
};

struct RiskReport {
  double mc_risk = 0.0;
  double stderr_ = 0.0;  // sample sd / sqrt(reps)
  int reps = 0;
  std::uint64_t seed = 0;
  double e_penalty_hat = 0.0;
  double e_pseudo_hat = 0.0;
  double entropy_hat = 0.0;  // plug-in entropy of the estimate's empirical law
  double var_hat = 0.0;      // empirical E ||est - E est||^2 (unbiased)
  int distinct_estimates = 0;
  bool informative = true;  // false if any replicate had infinite divergence
  std::vector<CertificateComparison> comparisons;
};

/// reps independent replicates of: draw a sample of size n, fit the
/// penalized MLE, record the Bhattacharyya divergence to the truth.
/// Replicate r uses derive_seed(seed, r).
RiskReport mc_risk(const Model& family, const Vector& theta_true,
                   const EpsGrid& grid, const Penalty& penalty, int n,
                   int reps, std::uint64_t seed,
                   const std::vector<double>* pseudo_table = nullptr);

void compare_certificates(RiskReport& report,
                          const std::vector<BoundCertificate>& certificates);

struct TailFrequencyReport {
  double t = 0.0;
  int reps = 0;
  int exceedances = 0;
  double frequency = 0.0;
  double kraft_like_sum = 0.0;
  double bound = 0.0;      // min(1, exp(-n t / 2) sum)
  double ci_lower = 0.0;   // frequency - 3 binomial standard errors, floored
  bool satisfied = false;  // ci_lower <= bound
};

/// Empirical frequency of the excess of the loss over the pointwise
/// redundancy-plus-pseudo-penalty, against its exponential bound.
TailFrequencyReport mc_tail_frequency(const Model& family,
                                      const Vector& theta_true,
                                      const EpsGrid& grid,
                                      const Penalty& penalty,
                                      const std::vector<double>* pseudo_table,
                                      int n, double t, int reps,
                                      std::uint64_t seed);

struct LemmaCheck {
  std::string check_id;
  int trials = 0;
  int failures = 0;
  double worst_margin = 0.0;  // smallest normalized slack observed
  std::uint64_t seed = 0;
  std::vector<std::string> failure_replays;
};

struct LemmaCheckLedger {
  std::vector<LemmaCheck> checks;
  int total_failures() const;
};

/// Dominance checks for the closed-form lattice summation bounds: exact
/// truncated sum plus analytic remainder never exceeds the bound.
LemmaCheckLedger grid_summation_checks(std::uint64_t seed, int trials);

/// Randomized oracle for every supporting inequality, the grid summation
/// checks included.
LemmaCheckLedger lemma_suite(std::uint64_t seed, int trials);

}  // namespace resolv
