#include "resolv/experiment.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace resolv {

namespace {

using nlohmann::json;

double require_number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number");
  return j.get<double>();
}

Vector parse_vector(const json& j, const std::string& field, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    throw ConfigError(field,
                      "expected an array of " + std::to_string(dim) + " numbers");
  }
  Vector v(dim);
  for (int i = 0; i < dim; ++i) {
    v[i] = require_number(j[i], field + "[" + std::to_string(i) + "]");
  }
  return v;
}

std::string fmt_double(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.12g", v);
  return buffer;
}

Box join_box(Box box, const Vector& point) {
  for (int j = 0; j < box.dim(); ++j) {
    box.lo[j] = std::min(box.lo[j], point[j]);
    box.hi[j] = std::max(box.hi[j], point[j]);
  }
  return box;
}

// beta with KL(theta* || nearest net point) <= beta eps^2 for every
// discretization: d/8 times the largest log-partition Hessian eigenvalue
// over the box (nearest point is within eps/2 per axis).
double kl_net_beta(const Model& model, const Box& box) {
  const ExponentialFamily& fam = model.exponential();
  const int d = fam.dim;
  constexpr int kMesh = 101;
  double sup = 0.0;
  std::vector<long> idx(d, 0);
  Vector theta(d);
  bool done = false;
  while (!done) {
    for (int j = 0; j < d; ++j) {
      const double t = static_cast<double>(idx[j]) / (kMesh - 1);
      theta[j] = box.lo[j] + t * (box.hi[j] - box.lo[j]);
    }
    const Matrix h = fam.log_partition_hessian(theta);
    double top;
    if (d == 1) {
      top = h(0, 0);
    } else {
      Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
      top = solver.eigenvalues().maxCoeff();
    }
    sup = std::max(sup, top);
    int j = 0;
    while (j < d && ++idx[j] == kMesh) {
      idx[j] = 0;
      ++j;
    }
    done = (j == d);
  }
  return sup * d / 8.0;
}

struct PowerTailHypotheses {
  double a = 0.0, b = 1.0, radius = 0.0, c = 0.0;
};

struct RunContext {
  const ExperimentConfig* config = nullptr;
  Model model;
  double n = 0.0;
  EpsGrid grid;
  std::vector<Vector> points;
  Penalty penalty;
  Resolvability resolvability;
  std::optional<ExpectationEstimate> exact_penalty_mean;
  std::optional<PseudoPenalty> pseudo;

  RunContext(const ExperimentConfig& cfg, double n_in)
      : config(&cfg),
        model(cfg.model()),
        n(n_in),
        grid(cfg.grid.grid_for(n_in)),
        points(enumerate_points(grid)),
        penalty(cfg.penalty.build(points.size())) {
    resolvability =
        resolvability_index(points, penalty,
                            [&](const Vector& theta) {
                              return model.kl_divergence(cfg.theta_true, theta);
                            },
                            n);
    if (penalty.constant_on_grid()) {
      exact_penalty_mean =
          ExpectationEstimate{penalty.at(points.front(), 0), Provenance::Exact};
    }
    if (cfg.pseudo.has_value()) pseudo = cfg.pseudo->build(model.dim());
  }

  Box envelope_box() const {
    return join_box(grid.box, config->theta_true);
  }

  // The mesh sweeps behind c and beta are shared across certificates.
  double decay_constant() const {
    if (!decay_constant_.has_value()) {
      decay_constant_ = resolv::gaussian_decay_constant(model, envelope_box());
    }
    return *decay_constant_;
  }
  double net_radius_beta() const {
    if (!net_radius_beta_.has_value()) {
      net_radius_beta_ = kl_net_beta(model, envelope_box());
    }
    return *net_radius_beta_;
  }

 private:
  mutable std::optional<double> decay_constant_;
  mutable std::optional<double> net_radius_beta_;
};

// Affinity hypotheses for the unbounded-space bounds, from the location
// structure: power decay with a = twice the sum of the first central moments,
// b = 1, and a Gaussian-shaped bound inside the ball.
PowerTailHypotheses location_power_tail(const RunContext& ctx) {
  const Model& model = ctx.model;
  if (!model.is_location()) {
    throw HypothesisError("affinity power bound outside the ball",
                          "no power-decay affinity bound certified for " +
                              model.name());
  }
  PowerTailHypotheses hyp;
  const double s = model.location().first_central_moment;
  hyp.a = 4.0 * s;  // 2 (s_P + s_model) with the truth inside the family
  hyp.b = 1.0;
  hyp.radius = std::max(11.0 * hyp.a, 3.0 * ctx.grid.eps);
  if (model.is_exponential()) {
    hyp.c = ctx.decay_constant();
  } else {
    // Marginal-median route: minimum marginal density within r of the
    // median, where r covers the ball plus the median-mean slack.
    const int d = model.dim();
    const double r = hyp.radius + std::sqrt(double(d)) * 2.0 * s;
    const double min_density = 0.5 * std::exp(-r);
    hyp.c = min_density * min_density / (2.0 * d);
  }
  return hyp;
}

ExpectationEstimate need_penalty_mean(
    const RunContext& ctx, const std::optional<ExpectationEstimate>& mc) {
  if (ctx.exact_penalty_mean.has_value()) return *ctx.exact_penalty_mean;
  if (mc.has_value()) return *mc;
  throw HypothesisError("E penalty(estimate) available",
                        "the penalty is not constant over the grid; run "
                        "mc-risk for an empirical certificate");
}

void require_exponential(const Model& model, const char* hypothesis) {
  if (!model.is_exponential()) {
    throw HypothesisError(hypothesis,
                          "no decay constant certified for " + model.name());
  }
}

BoundCertificate build_certificate(
    const std::string& id, const RunContext& ctx,
    const std::optional<ExpectationEstimate>& mc_penalty_mean,
    const std::optional<ExpectationEstimate>& mc_variance,
    const std::optional<ExpectationEstimate>& mc_entropy) {
  const Model& model = ctx.model;
  const Vector& theta_true = ctx.config->theta_true;
  const double n = ctx.n;
  const auto affinity = [&](const Vector& theta) {
    return model.hellinger_affinity(theta_true, theta);
  };

  if (id == "penalized-risk") {
    const std::vector<double> zeros(ctx.points.size(), 0.0);
    return general_certificate(ctx.points, ctx.penalty, zeros,
                               ExpectationEstimate{0.0, Provenance::Exact},
                               std::nullopt, ctx.resolvability.value, n,
                               SummationMode::IncludePenalty);
  }
  if (id == "bhattacharyya-pseudo" ||
      id == "bhattacharyya-pseudo-exclude-penalty") {
    double alpha = 0.5;
    if (ctx.pseudo.has_value() &&
        ctx.pseudo->kind() == PseudoPenalty::Kind::AlphaBhattacharyya) {
      alpha = ctx.pseudo->alpha();
    }
    if (id == "bhattacharyya-pseudo") {
      return bhattacharyya_certificate(ctx.grid, ctx.points, ctx.penalty,
                                       SummationMode::IncludePenalty, alpha,
                                       affinity, ctx.resolvability.value, n,
                                       std::nullopt);
    }
    return bhattacharyya_certificate(
        ctx.grid, ctx.points, ctx.penalty, SummationMode::ExcludePenalty,
        alpha, affinity, ctx.resolvability.value, n,
        need_penalty_mean(ctx, mc_penalty_mean));
  }
  if (id == "gaussian-decay") {
    require_exponential(model, "affinity gaussian envelope");
    const double c = ctx.decay_constant();
    return gaussian_decay_certificate(ctx.grid.eps, model.dim(), n, c,
                                      ctx.resolvability.value,
                                      need_penalty_mean(ctx, mc_penalty_mean),
                                      AssumptionStatus::Checked);
  }
  if (id == "gaussian-decay-concrete") {
    if (ctx.config->grid.eps_rule != "sqrt(2/n)") {
      throw HypothesisError("eps = sqrt(2/n)",
                            "the concrete form needs the sqrt(2/n) rule");
    }
    if (ctx.penalty.kind() != Penalty::Kind::Zero) {
      throw HypothesisError("penalty = 0",
                            "the concrete form is for the unpenalized MLE");
    }
    require_exponential(model, "affinity gaussian envelope");
    const double c = ctx.decay_constant();
    // With a zero penalty the resolvability index is the KL to the grid.
    return gaussian_decay_concrete_certificate(
        model.dim(), n, c, ctx.resolvability.value, AssumptionStatus::Checked);
  }
  if (id == "minimax-gaussian-decay") {
    require_exponential(model,
                        "affinity gaussian envelope uniform over the model");
    return minimax_certificate(ctx.net_radius_beta(), ctx.decay_constant(),
                               model.dim(), n);
  }
  if (id == "gaussian-center-power-tail") {
    const PowerTailHypotheses hyp = location_power_tail(ctx);
    return mixed_regime_certificate(ctx.grid.eps, model.dim(), n, hyp.c,
                                    hyp.a, hyp.b, hyp.radius,
                                    ctx.resolvability.value,
                                    need_penalty_mean(ctx, mc_penalty_mean));
  }
  if (id == "squared-norm-any-n") {
    if (ctx.penalty.kind() != Penalty::Kind::SquaredNorm) {
      throw HypothesisError("penalty = ||theta||^2",
                            "configure the squared-norm penalty");
    }
    const PowerTailHypotheses hyp = location_power_tail(ctx);
    return squared_norm_certificate(ctx.grid.eps, model.dim(), n, hyp.c,
                                    hyp.a, hyp.b, hyp.radius,
                                    theta_true.norm(),
                                    ctx.resolvability.value);
  }
  if (id == "entropy") {
    if (mc_entropy.has_value()) {
      return entropy_certificate(ctx.resolvability.value, mc_entropy->value,
                                 need_penalty_mean(ctx, mc_penalty_mean), n,
                                 "mc-estimate");
    }
    return entropy_certificate(ctx.resolvability.value,
                               std::log(double(ctx.points.size())),
                               need_penalty_mean(ctx, mc_penalty_mean), n,
                               "log-cardinality");
  }
  if (id == "map") {
    if (ctx.penalty.kind() != Penalty::Kind::Codelength ||
        ctx.penalty.codelength_mode() != CodelengthMode::LogReciprocal) {
      throw HypothesisError("penalty = log(1/prior)",
                            "configure a codelength penalty in map mode");
    }
    return penalty_pseudo_certificate(ctx.points, ctx.penalty, 1.0,
                                      need_penalty_mean(ctx, mc_penalty_mean),
                                      ctx.resolvability.value, n);
  }
  if (id == "penalty-pseudo") {
    if (!ctx.pseudo.has_value() ||
        ctx.pseudo->kind() != PseudoPenalty::Kind::AlphaTimesPenalty) {
      throw HypothesisError("pseudo-penalty = alpha * penalty",
                            "configure an alpha-times-penalty pseudo-penalty");
    }
    return penalty_pseudo_certificate(ctx.points, ctx.penalty,
                                      ctx.pseudo->alpha(),
                                      need_penalty_mean(ctx, mc_penalty_mean),
                                      ctx.resolvability.value, n);
  }
  if (id == "quadratic-pseudo") {
    if (!mc_variance.has_value()) {
      throw HypothesisError("estimator variance available",
                            "the variance of the fitted point needs Monte "
                            "Carlo estimation; run mc-risk");
    }
    double alpha = 1.0 / (ctx.grid.eps * ctx.grid.eps);
    if (ctx.pseudo.has_value() &&
        ctx.pseudo->kind() == PseudoPenalty::Kind::Quadratic) {
      alpha = ctx.pseudo->alpha();
    }
    return quadratic_certificate(ctx.grid.eps, model.dim(), alpha,
                                 *mc_variance,
                                 need_penalty_mean(ctx, mc_penalty_mean),
                                 ctx.resolvability.value, n);
  }
  throw ConfigError("certificates", "unknown certificate id: " + id);
}

std::vector<std::string> requested_ids(const ExperimentConfig& config) {
  for (const std::string& id : config.certificates) {
    if (id == "all-applicable") return known_certificate_ids();
  }
  return config.certificates;
}

}  // namespace

double GridSpec::eps_for(double n) const {
  if (eps.has_value()) return *eps;
  if (eps_rule == "sqrt(2/n)") return std::sqrt(2.0 / n);
  if (eps_rule == "const/sqrt(n)") return eps_const / std::sqrt(n);
  throw ConfigError("grid", "no eps and no eps rule");
}

EpsGrid GridSpec::grid_for(double n) const {
  return EpsGrid::make(offset, eps_for(n), box);
}

Penalty PenaltySpec::build(std::size_t grid_points) const {
  if (type == "zero") return Penalty::zero();
  if (type == "constant") return Penalty::constant(value);
  if (type == "squared-norm") return Penalty::squared_norm();
  if (type == "codelength") {
    std::vector<double> pmf = values;
    if (uniform_pmf) {
      pmf.assign(grid_points, 1.0 / static_cast<double>(grid_points));
    }
    if (pmf.size() != grid_points) {
      throw ConfigError("penalty.pmf", "pmf covers " +
                                           std::to_string(pmf.size()) +
                                           " points, grid has " +
                                           std::to_string(grid_points));
    }
    return Penalty::codelength(std::move(pmf), mode);
  }
  if (type == "table") {
    if (values.size() != grid_points) {
      throw ConfigError("penalty.values",
                        "table covers " + std::to_string(values.size()) +
                            " points, grid has " + std::to_string(grid_points));
    }
    return Penalty::table(values);
  }
  throw ConfigError("penalty.type", "unknown penalty type: " + type);
}

PseudoPenalty PseudoSpec::build(int dim) const {
  if (type == "zero") return PseudoPenalty::zero();
  if (type == "alpha-bhattacharyya") {
    return PseudoPenalty::alpha_bhattacharyya(alpha);
  }
  if (type == "quadratic") {
    if (static_cast<int>(center.size()) != dim) {
      throw ConfigError("pseudo_penalty.center", "expected " +
                                                     std::to_string(dim) +
                                                     " coordinates");
    }
    Vector c(dim);
    for (int j = 0; j < dim; ++j) c[j] = center[j];
    return PseudoPenalty::quadratic(alpha, std::move(c));
  }
  if (type == "alpha-times-penalty") {
    return PseudoPenalty::alpha_times_penalty(alpha);
  }
  if (type == "entropy-codelength") {
    return PseudoPenalty::entropy_codelength(values);
  }
  if (type == "table") return PseudoPenalty::table(values);
  throw ConfigError("pseudo_penalty.type", "unknown pseudo-penalty type: " + type);
}

Model ExperimentConfig::model() const {
  return Model::from_name(family_id, dim);
}

ExperimentConfig ExperimentConfig::parse(const json& j) {
  ExperimentConfig config;
  config.raw = j;
  if (!j.is_object()) throw ConfigError("(root)", "expected a JSON object");

  const auto& fam = j.find("family");
  if (fam == j.end() || !fam->is_object() || !fam->contains("id")) {
    throw ConfigError("family", "expected {id, dim}");
  }
  config.family_id = (*fam)["id"].get<std::string>();
  config.dim = fam->value("dim", 1);
  try {
    config.model();
  } catch (const DomainError& e) {
    throw ConfigError("family", e.what());
  }

  if (!j.contains("true_theta")) {
    throw ConfigError("true_theta", "the data-generating parameter is required");
  }
  config.theta_true = parse_vector(j["true_theta"], "true_theta", config.dim);

  const auto& grid = j.find("grid");
  if (grid == j.end() || !grid->is_object()) {
    throw ConfigError("grid", "expected {offset, box, eps | eps_rule}");
  }
  config.grid.offset =
      parse_vector(grid->value("offset", json::array()), "grid.offset",
                   config.dim);
  if (!grid->contains("box") || !(*grid)["box"].is_array() ||
      static_cast<int>((*grid)["box"].size()) != config.dim) {
    throw ConfigError("grid.box",
                      "expected " + std::to_string(config.dim) + " [lo, hi] pairs");
  }
  config.grid.box.lo.resize(config.dim);
  config.grid.box.hi.resize(config.dim);
  for (int a = 0; a < config.dim; ++a) {
    const json& pair = (*grid)["box"][a];
    if (!pair.is_array() || pair.size() != 2) {
      throw ConfigError("grid.box[" + std::to_string(a) + "]",
                        "expected [lo, hi]");
    }
    config.grid.box.lo[a] = require_number(pair[0], "grid.box.lo");
    config.grid.box.hi[a] = require_number(pair[1], "grid.box.hi");
    if (!(config.grid.box.lo[a] <= config.grid.box.hi[a])) {
      throw ConfigError("grid.box[" + std::to_string(a) + "]", "lo > hi");
    }
  }
  const bool has_eps = grid->contains("eps");
  const bool has_rule = grid->contains("eps_rule");
  if (has_eps == has_rule) {
    throw ConfigError("grid", "exactly one of eps and eps_rule is required");
  }
  if (has_eps) {
    const double eps = require_number((*grid)["eps"], "grid.eps");
    if (!(eps > 0.0)) throw ConfigError("grid.eps", "must be positive");
    config.grid.eps = eps;
  } else {
    config.grid.eps_rule = (*grid)["eps_rule"].get<std::string>();
    if (config.grid.eps_rule != "sqrt(2/n)" &&
        config.grid.eps_rule != "const/sqrt(n)") {
      throw ConfigError("grid.eps_rule",
                        "supported rules: sqrt(2/n), const/sqrt(n)");
    }
    if (config.grid.eps_rule == "const/sqrt(n)") {
      config.grid.eps_const =
          require_number(grid->value("eps_const", json()), "grid.eps_const");
      if (!(config.grid.eps_const > 0.0)) {
        throw ConfigError("grid.eps_const", "must be positive");
      }
    }
  }

  const auto& pen = j.find("penalty");
  if (pen == j.end() || !pen->is_object() || !pen->contains("type")) {
    throw ConfigError("penalty", "expected {type, ...}");
  }
  config.penalty.type = (*pen)["type"].get<std::string>();
  config.penalty.value = pen->value("value", 0.0);
  if (config.penalty.type == "codelength") {
    const std::string mode = pen->value("mode", "twice-kraft");
    if (mode == "map") {
      config.penalty.mode = CodelengthMode::LogReciprocal;
    } else if (mode == "twice-kraft") {
      config.penalty.mode = CodelengthMode::TwiceLogReciprocal;
    } else {
      throw ConfigError("penalty.mode", "expected map or twice-kraft");
    }
    if (!pen->contains("pmf")) {
      throw ConfigError("penalty.pmf", "codelength penalty needs a pmf");
    }
    if ((*pen)["pmf"].is_string()) {
      if ((*pen)["pmf"].get<std::string>() != "uniform") {
        throw ConfigError("penalty.pmf", "expected \"uniform\" or an array");
      }
      config.penalty.uniform_pmf = true;
    } else {
      config.penalty.values = (*pen)["pmf"].get<std::vector<double>>();
    }
  } else if (config.penalty.type == "table") {
    config.penalty.values =
        pen->value("values", std::vector<double>{});
  } else if (config.penalty.type != "zero" &&
             config.penalty.type != "constant" &&
             config.penalty.type != "squared-norm") {
    throw ConfigError("penalty.type",
                      "unknown penalty type: " + config.penalty.type);
  }

  if (j.contains("pseudo_penalty")) {
    const json& ps = j["pseudo_penalty"];
    PseudoSpec spec;
    spec.type = ps.value("type", "zero");
    spec.alpha = ps.value("alpha", 0.5);
    spec.center = ps.value("center", std::vector<double>{});
    spec.values = ps.value("values", std::vector<double>{});
    try {
      spec.build(config.dim);
    } catch (const DomainError& e) {
      throw ConfigError("pseudo_penalty", e.what());
    }
    config.pseudo = std::move(spec);
  }

  if (!j.contains("n") || !j["n"].is_array() || j["n"].empty()) {
    throw ConfigError("n", "expected a non-empty array of sample sizes");
  }
  for (const json& v : j["n"]) {
    if (!v.is_number_integer() || v.get<long>() < 1) {
      throw ConfigError("n", "sample sizes must be integers >= 1");
    }
    config.sample_sizes.push_back(v.get<int>());
  }
  config.reps = j.value("reps", 2000);
  if (config.reps < 2) throw ConfigError("reps", "must be >= 2");
  config.seed = j.value("seed", 1ULL);

  if (!j.contains("certificates") || !j["certificates"].is_array() ||
      j["certificates"].empty()) {
    throw ConfigError("certificates",
                      "expected a non-empty array of theorem ids");
  }
  for (const json& v : j["certificates"]) {
    const std::string id = v.get<std::string>();
    if (id != "all-applicable") {
      const auto& known = known_certificate_ids();
      if (std::find(known.begin(), known.end(), id) == known.end()) {
        throw ConfigError("certificates", "unknown certificate id: " + id);
      }
    }
    config.certificates.push_back(id);
  }
  return config;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
  }
  return parse(j);
}

const std::vector<std::string>& known_certificate_ids() {
  static const std::vector<std::string> ids = {
      "penalized-risk",
      "bhattacharyya-pseudo",
      "bhattacharyya-pseudo-exclude-penalty",
      "gaussian-decay",
      "gaussian-decay-concrete",
      "minimax-gaussian-decay",
      "gaussian-center-power-tail",
      "squared-norm-any-n",
      "entropy",
      "map",
      "penalty-pseudo",
      "quadratic-pseudo",
  };
  return ids;
}

json certificate_json(const BoundCertificate& cert) {
  json components = json::object();
  for (const auto& [name, v] : cert.components) components[name] = v;
  json params = json::object();
  for (const auto& [name, v] : cert.params) params[name] = v;
  json assumptions = json::array();
  for (const Assumption& a : cert.assumptions) {
    assumptions.push_back({{"name", a.name},
                           {"status", to_string(a.status)},
                           {"detail", a.detail}});
  }
  return json{{"theorem_id", cert.theorem_id},
              {"value", cert.value},
              {"components", components},
              {"assumptions", assumptions},
              {"params", params}};
}

json risk_report_json(const RiskReport& report) {
  json comparisons = json::array();
  for (const CertificateComparison& c : report.comparisons) {
    comparisons.push_back({{"certificate_id", c.certificate_id},
                           {"value", c.value},
                           {"satisfied", c.satisfied},
                           {"margin", c.margin}});
  }
  return json{{"mc_risk", report.mc_risk},
              {"stderr", report.stderr_},
              {"reps", report.reps},
              {"seed", report.seed},
              {"e_penalty_hat", report.e_penalty_hat},
              {"e_pseudo_hat", report.e_pseudo_hat},
              {"entropy_hat", report.entropy_hat},
              {"var_hat", report.var_hat},
              {"distinct_estimates", report.distinct_estimates},
              {"informative", report.informative},
              {"comparisons", comparisons}};
}

json ledger_json(const LemmaCheckLedger& ledger, std::uint64_t seed,
                 int trials) {
  json checks = json::array();
  for (const LemmaCheck& c : ledger.checks) {
    checks.push_back({{"check_id", c.check_id},
                      {"trials", c.trials},
                      {"failures", c.failures},
                      {"worst_margin", c.worst_margin},
                      {"seed", c.seed},
                      {"failure_replays", c.failure_replays}});
  }
  return json{{"version", kLibraryVersion},
              {"seed", seed},
              {"trials", trials},
              {"total_failures", ledger.total_failures()},
              {"checks", checks}};
}

json run_certify(const ExperimentConfig& config) {
  json runs = json::array();
  const std::vector<std::string> ids = requested_ids(config);
  for (int n : config.sample_sizes) {
    RunContext ctx(config, n);
    json certificates = json::array();
    json inapplicable = json::array();
    for (const std::string& id : ids) {
      try {
        certificates.push_back(certificate_json(build_certificate(
            id, ctx, std::nullopt, std::nullopt, std::nullopt)));
      } catch (const HypothesisError& e) {
        inapplicable.push_back(
            {{"theorem_id", id}, {"violated_hypothesis", e.hypothesis()},
             {"detail", e.what()}});
      }
    }
    runs.push_back({{"n", n},
                    {"eps", ctx.grid.eps},
                    {"grid_points", ctx.points.size()},
                    {"resolvability", ctx.resolvability.value},
                    {"certificates", certificates},
                    {"inapplicable", inapplicable}});
  }
  return json{{"version", kLibraryVersion},
              {"command", "certify"},
              {"config", config.raw},
              {"runs", runs}};
}

McRiskResult run_mc_risk(const ExperimentConfig& config,
                         double budget_seconds) {
  if (budget_seconds < 0.0) {
    budget_seconds = 60.0 * static_cast<double>(config.sample_sizes.size());
  }
  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  };

  McRiskResult result;
  std::string csv =
      "n,eps,reps,seed,mc_risk,stderr,certificate_id,certificate_value,"
      "satisfied,margin\r\n";
  json runs = json::array();
  bool all_satisfied = true;
  bool budget_exceeded = false;
  const std::vector<std::string> ids = requested_ids(config);

  for (int n : config.sample_sizes) {
    if (elapsed() > budget_seconds) {
      budget_exceeded = true;
      break;
    }
    RunContext ctx(config, n);

    std::vector<double> pseudo_table;
    const std::vector<double>* pseudo_ptr = nullptr;
    if (ctx.pseudo.has_value()) {
      PseudoContext pc{&ctx.model, &config.theta_true, double(n)};
      pseudo_table =
          pseudo_values(*ctx.pseudo, ctx.points, ctx.penalty, pc);
      pseudo_ptr = &pseudo_table;
    }
    RiskReport report = mc_risk(ctx.model, config.theta_true, ctx.grid,
                                ctx.penalty, n, config.reps, config.seed,
                                pseudo_ptr);

    const ExpectationEstimate mc_pen{report.e_penalty_hat,
                                     Provenance::MonteCarlo};
    const ExpectationEstimate mc_var{report.var_hat, Provenance::MonteCarlo};
    std::vector<BoundCertificate> certificates;
    json inapplicable = json::array();
    for (const std::string& id : ids) {
      try {
        certificates.push_back(
            build_certificate(id, ctx, mc_pen, mc_var, std::nullopt));
      } catch (const HypothesisError& e) {
        inapplicable.push_back(
            {{"theorem_id", id}, {"violated_hypothesis", e.hypothesis()},
             {"detail", e.what()}});
      }
    }
    compare_certificates(report, certificates);

    json cert_array = json::array();
    for (const BoundCertificate& cert : certificates) {
      cert_array.push_back(certificate_json(cert));
    }
    runs.push_back({{"n", n},
                    {"eps", ctx.grid.eps},
                    {"report", risk_report_json(report)},
                    {"certificates", cert_array},
                    {"inapplicable", inapplicable}});

    for (const CertificateComparison& cmp : report.comparisons) {
      all_satisfied = all_satisfied && cmp.satisfied;
      csv += std::to_string(n) + "," + fmt_double(ctx.grid.eps) + "," +
             std::to_string(config.reps) + "," + std::to_string(config.seed) +
             "," + fmt_double(report.mc_risk) + "," +
             fmt_double(report.stderr_) + "," + cmp.certificate_id + "," +
             fmt_double(cmp.value) + "," +
             (cmp.satisfied ? "true" : "false") + "," +
             fmt_double(cmp.margin) + "\r\n";
    }
  }

  result.csv = std::move(csv);
  result.report = json{{"version", kLibraryVersion},
                       {"command", "mc-risk"},
                       {"config", config.raw},
                       {"budget_seconds", budget_seconds},
                       {"budget_exceeded", budget_exceeded},
                       {"runs", runs}};
  result.exit_code = budget_exceeded ? 3 : (all_satisfied ? 0 : 1);
  return result;
}

LemmaRunResult run_verify_lemmas(std::uint64_t seed, int trials) {
  if (trials < 1) throw ConfigError("--trials", "must be >= 1");
  const LemmaCheckLedger ledger = lemma_suite(seed, trials);
  LemmaRunResult result;
  result.report = ledger_json(ledger, seed, trials);
  result.exit_code = ledger.total_failures() == 0 ? 0 : 1;
  return result;
}

}  // namespace resolv
