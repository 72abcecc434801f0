#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "resolv/bounds.hpp"
#include "resolv/verify.hpp"

namespace resolv {

inline constexpr const char* kLibraryVersion = "0.1.0";

/// Invalid configuration; carries the offending field path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct GridSpec {
  Vector offset;
  Box box;
  std::optional<double> eps;
  std::string eps_rule;  // "sqrt(2/n)" or "const/sqrt(n)"
  double eps_const = 0.0;

  double eps_for(double n) const;
  EpsGrid grid_for(double n) const;
};

struct PenaltySpec {
  std::string type;  // zero | constant | squared-norm | codelength | table
  double value = 0.0;
  bool uniform_pmf = false;
  std::vector<double> values;
  CodelengthMode mode = CodelengthMode::TwiceLogReciprocal;

  Penalty build(std::size_t grid_points) const;
};

struct PseudoSpec {
  std::string type;  // zero | alpha-bhattacharyya | quadratic |
                     // alpha-times-penalty | entropy-codelength | table
  double alpha = 0.5;
  std::vector<double> center;
  std::vector<double> values;

  PseudoPenalty build(int dim) const;
};

struct ExperimentConfig {
  std::string family_id;
  int dim = 1;
  Vector theta_true;
  GridSpec grid;
  PenaltySpec penalty;
  std::optional<PseudoSpec> pseudo;
  std::vector<int> sample_sizes;
  int reps = 2000;
  std::uint64_t seed = 1;
  std::vector<std::string> certificates;
  nlohmann::json raw;  // embedded in reports for provenance

  Model model() const;
  static ExperimentConfig parse(const nlohmann::json& j);
  static ExperimentConfig load(const std::string& path);
};

/// Certificate ids the runner understands, in emission order.
const std::vector<std::string>& known_certificate_ids();

nlohmann::json certificate_json(const BoundCertificate& cert);
nlohmann::json risk_report_json(const RiskReport& report);
nlohmann::json ledger_json(const LemmaCheckLedger& ledger, std::uint64_t seed,
                           int trials);

nlohmann::json run_certify(const ExperimentConfig& config);

struct McRiskResult {
  std::string csv;
  nlohmann::json report;
  int exit_code = 0;  // 0 all satisfied, 1 violation, 3 budget exceeded
};

McRiskResult run_mc_risk(const ExperimentConfig& config,
                         double budget_seconds = -1.0);

struct LemmaRunResult {
  nlohmann::json report;
  int exit_code = 0;  // 0 iff zero failures
};

LemmaRunResult run_verify_lemmas(std::uint64_t seed, int trials);

}  // namespace resolv
