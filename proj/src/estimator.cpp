#include "resolv/estimator.hpp"

#include <cmath>
#include <limits>

namespace resolv {

Penalty Penalty::zero() { return Penalty(Kind::Zero); }

Penalty Penalty::constant(double value) {
  Penalty p(Kind::Constant);
  p.constant_ = value;
  return p;
}

Penalty Penalty::squared_norm() { return Penalty(Kind::SquaredNorm); }

Penalty Penalty::codelength(std::vector<double> pmf, CodelengthMode mode) {
  CompensatedSum total;
  for (double q : pmf) {
    if (!(q > 0.0)) {
      throw DomainError("codelength penalty: pmf entries must be positive");
    }
    total.add(q);
  }
  if (std::abs(total.value() - 1.0) > 1e-12) {
    throw DomainError("codelength penalty: pmf sums to " +
                      std::to_string(total.value()) + ", not 1");
  }
  Penalty p(Kind::Codelength);
  p.values_ = std::move(pmf);
  p.mode_ = mode;
  return p;
}

Penalty Penalty::table(std::vector<double> values) {
  if (values.empty()) throw DomainError("table penalty: empty table");
  Penalty p(Kind::Table);
  p.values_ = std::move(values);
  return p;
}

Penalty Penalty::adaptive(std::vector<double> l0,
                          std::vector<AdaptiveComponent> models) {
  if (l0.size() != models.size()) {
    throw DomainError("adaptive penalty: selector costs and models disagree");
  }
  Penalty p(Kind::Adaptive);
  p.l0_ = std::move(l0);
  p.components_ = std::move(models);
  return p;
}

double Penalty::at(const Vector& theta, std::size_t enumeration_index) const {
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::Constant:
      return constant_;
    case Kind::SquaredNorm:
      return theta.squaredNorm();
    case Kind::Codelength: {
      if (enumeration_index >= values_.size()) {
        throw DomainError("codelength penalty: index beyond the table");
      }
      const double code = -std::log(values_[enumeration_index]);
      return mode_ == CodelengthMode::TwiceLogReciprocal ? 2.0 * code : code;
    }
    case Kind::Table:
      if (enumeration_index >= values_.size()) {
        throw DomainError("table penalty: index beyond the table; the table "
                          "must cover every grid point");
      }
      return values_[enumeration_index];
    case Kind::Adaptive:
      throw DomainError("adaptive penalty: use adaptive_value(k, theta)");
  }
  throw Error("unreachable");
}

bool Penalty::constant_on_grid() const {
  switch (kind_) {
    case Kind::Zero:
    case Kind::Constant:
      return true;
    case Kind::Codelength: {
      for (double q : values_) {
        if (std::abs(q - values_.front()) > 1e-15) return false;
      }
      return true;
    }
    default:
      return false;
  }
}

bool Penalty::twice_differentiable() const {
  return kind_ == Kind::Zero || kind_ == Kind::Constant ||
         kind_ == Kind::SquaredNorm;
}

Matrix Penalty::hessian(const Vector& theta) const {
  const int d = static_cast<int>(theta.size());
  switch (kind_) {
    case Kind::Zero:
    case Kind::Constant:
      return Matrix::Zero(d, d);
    case Kind::SquaredNorm:
      return 2.0 * Matrix::Identity(d, d);
    default:
      throw DomainError("penalty has no smooth Hessian");
  }
}

double Penalty::adaptive_value(int k, const Vector& theta,
                               std::size_t index_within_model) const {
  if (kind_ != Kind::Adaptive) {
    throw DomainError("adaptive_value on a non-adaptive penalty");
  }
  if (k < 1 || static_cast<std::size_t>(k) > l0_.size()) {
    throw DomainError("adaptive penalty: model index out of range");
  }
  return l0_[k - 1] +
         components_[k - 1].penalty->at(theta, index_within_model);
}

const std::vector<double>& Penalty::model_costs() const {
  if (kind_ != Kind::Adaptive) {
    throw DomainError("model_costs on a non-adaptive penalty");
  }
  return l0_;
}

const std::vector<Penalty::AdaptiveComponent>& Penalty::models() const {
  if (kind_ != Kind::Adaptive) {
    throw DomainError("models on a non-adaptive penalty");
  }
  return components_;
}

PseudoPenalty PseudoPenalty::zero() { return PseudoPenalty(Kind::Zero); }

PseudoPenalty PseudoPenalty::alpha_bhattacharyya(double alpha) {
  if (alpha < 0.0 || alpha > 1.0) {
    throw DomainError("alpha_bhattacharyya: alpha must lie in [0, 1]");
  }
  PseudoPenalty p(Kind::AlphaBhattacharyya);
  p.alpha_ = alpha;
  return p;
}

PseudoPenalty PseudoPenalty::entropy_codelength(std::vector<double> pmf) {
  PseudoPenalty p(Kind::EntropyCodelength);
  p.values_ = std::move(pmf);
  return p;
}

PseudoPenalty PseudoPenalty::quadratic(double alpha, Vector center) {
  if (alpha < 0.0) throw DomainError("quadratic pseudo-penalty: alpha < 0");
  PseudoPenalty p(Kind::Quadratic);
  p.alpha_ = alpha;
  p.center_ = std::move(center);
  return p;
}

PseudoPenalty PseudoPenalty::alpha_times_penalty(double alpha) {
  if (alpha < 0.0) throw DomainError("alpha_times_penalty: alpha < 0");
  PseudoPenalty p(Kind::AlphaTimesPenalty);
  p.alpha_ = alpha;
  return p;
}

PseudoPenalty PseudoPenalty::table(std::vector<double> values) {
  PseudoPenalty p(Kind::Table);
  p.values_ = std::move(values);
  return p;
}

std::vector<double> pseudo_values(const PseudoPenalty& pseudo,
                                  const std::vector<Vector>& points,
                                  const Penalty& penalty,
                                  const PseudoContext& context) {
  std::vector<double> out(points.size(), 0.0);
  switch (pseudo.kind()) {
    case PseudoPenalty::Kind::Zero:
      break;
    case PseudoPenalty::Kind::AlphaBhattacharyya: {
      if (context.model == nullptr || context.theta_true == nullptr ||
          !(context.n > 0.0)) {
        throw DomainError("alpha_bhattacharyya values need the "
                          "data-generating member and sample size");
      }
      for (std::size_t i = 0; i < points.size(); ++i) {
        out[i] = pseudo.alpha() * context.n *
                 context.model->bhattacharyya(*context.theta_true, points[i]);
      }
      break;
    }
    case PseudoPenalty::Kind::EntropyCodelength: {
      if (pseudo.values().size() != points.size()) {
        throw DomainError("entropy_codelength: pmf does not cover the grid");
      }
      for (std::size_t i = 0; i < points.size(); ++i) {
        out[i] = 2.0 * std::log(1.0 / pseudo.values()[i]);
      }
      break;
    }
    case PseudoPenalty::Kind::Quadratic:
      for (std::size_t i = 0; i < points.size(); ++i) {
        out[i] = pseudo.alpha() * (points[i] - pseudo.center()).squaredNorm();
      }
      break;
    case PseudoPenalty::Kind::AlphaTimesPenalty:
      for (std::size_t i = 0; i < points.size(); ++i) {
        out[i] = pseudo.alpha() * penalty.at(points[i], i);
      }
      break;
    case PseudoPenalty::Kind::Table:
      if (pseudo.values().size() != points.size()) {
        throw DomainError("table pseudo-penalty does not cover the grid");
      }
      out = pseudo.values();
      break;
  }
  return out;
}

KraftSum kraft_sum(const std::vector<Vector>& points, const Penalty& penalty,
                   const std::vector<double>* pseudo) {
  if (pseudo != nullptr && pseudo->size() != points.size()) {
    throw DomainError("kraft_sum: pseudo-penalty table does not cover the grid");
  }
  if (penalty.grid_aligned() && penalty.table_size() != points.size()) {
    throw DomainError("kraft_sum: penalty table covers " +
                      std::to_string(penalty.table_size()) + " points, grid has " +
                      std::to_string(points.size()));
  }
  CompensatedSum acc;
  for (std::size_t i = 0; i < points.size(); ++i) {
    double exponent = penalty.at(points[i], i);
    if (pseudo != nullptr) exponent += (*pseudo)[i];
    acc.add(std::exp(-0.5 * exponent));
  }
  const double sum = acc.value();
  return KraftSum{sum, sum <= 1.0};
}

KraftSum kraft_sum(const EpsGrid& grid, const Penalty& penalty,
                   const std::vector<double>* pseudo, std::size_t cap) {
  return kraft_sum(enumerate_points(grid, cap), penalty, pseudo);
}

MleWorkspace::MleWorkspace(const Model& model_in, const EpsGrid& grid,
                           const Penalty& penalty, std::size_t cap)
    : model(&model_in), points(enumerate_points(grid, cap)) {
  if (points.empty()) throw DomainError("penalized_mle: empty grid");
  penalties.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    penalties[i] = penalty.at(points[i], i);
  }
  if (model->is_exponential()) {
    const ExponentialFamily& fam = model->exponential();
    log_partitions.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      const int j = fam.natural_domain.violating_axis(points[i]);
      if (j >= 0) {
        throw DomainError("penalized_mle: grid point leaves the natural "
                          "domain at coordinate " + std::to_string(j));
      }
      log_partitions[i] = fam.log_partition(points[i]);
    }
  }
}

MleResult penalized_mle(const MleWorkspace& ws, const DataSample& data) {
  if (data.n() < 1) throw DomainError("penalized_mle: empty sample");
  if (data.dim() != ws.points.front().size()) {
    throw DomainError("penalized_mle: data dimension mismatch");
  }
  const std::size_t m = ws.points.size();
  const double n = data.n();

  std::size_t best = m;
  double best_objective = std::numeric_limits<double>::infinity();

  if (ws.model->is_exponential()) {
    // Sufficient-statistic path: the objective differs from the full
    // negative log-likelihood by a data-only constant, which cannot move
    // the argmin. T accumulated with compensated summation.
    const ExponentialFamily& fam = ws.model->exponential();
    Vector stat_sum = Vector::Zero(data.dim());
    {
      std::vector<CompensatedSum> acc(data.dim());
      for (int r = 0; r < data.n(); ++r) {
        const Vector phi = fam.sufficient_statistic(data.points.row(r));
        for (int j = 0; j < data.dim(); ++j) acc[j].add(phi[j]);
      }
      for (int j = 0; j < data.dim(); ++j) stat_sum[j] = acc[j].value();
    }
    for (std::size_t i = 0; i < m; ++i) {
      const double objective = n * ws.log_partitions[i] -
                               ws.points[i].dot(stat_sum) + ws.penalties[i];
      if (objective < best_objective) {
        best_objective = objective;
        best = i;
      }
    }
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      CompensatedSum nll;
      for (int r = 0; r < data.n(); ++r) {
        nll.add(-ws.model->log_density(ws.points[i], data.points.row(r)));
      }
      const double objective = nll.value() + ws.penalties[i];
      if (objective < best_objective) {
        best_objective = objective;
        best = i;
      }
    }
  }

  if (best == m || !std::isfinite(best_objective)) {
    throw Error("penalized_mle: objective is non-finite at every grid point");
  }
  return MleResult{ws.points[best], best, best_objective};
}

MleResult penalized_mle(const Model& model, const EpsGrid& grid,
                        const Penalty& penalty, const DataSample& data) {
  return penalized_mle(MleWorkspace(model, grid, penalty), data);
}

AdaptiveL0 build_adaptive_penalty(const std::vector<double>& per_model_sums) {
  if (per_model_sums.empty()) {
    throw DomainError("build_adaptive_penalty: no models");
  }
  AdaptiveL0 out;
  out.l0.reserve(per_model_sums.size());
  CompensatedSum class_sum;
  for (std::size_t k = 1; k <= per_model_sums.size(); ++k) {
    const double s = per_model_sums[k - 1];
    if (!(s > 0.0)) {
      throw DomainError("build_adaptive_penalty: model sum " +
                        std::to_string(k) + " is not positive");
    }
    out.l0.push_back(k * M_SQRT2 + 2.0 * std::log(s));
    // exp(-l0/2) S_k collapses to exp(-k/sqrt 2).
    class_sum.add(std::exp(-static_cast<double>(k) / M_SQRT2));
  }
  out.class_sum = class_sum.value();
  out.twice_kraft_ok = out.class_sum <= 1.0;
  return out;
}

}  // namespace resolv
