#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "resolv/grid.hpp"
#include "resolv/models.hpp"
#include "resolv/types.hpp"

namespace resolv {

enum class CodelengthMode {
  LogReciprocal,       // penalty log(1/q); prior mass interpretation
  TwiceLogReciprocal,  // penalty 2 log(1/q); satisfies the half-exponent sum
};

/// Complexity term subtracted from the log-likelihood. Codelength and Table
/// variants are aligned with a grid's enumeration order.
class Penalty {
 public:
  enum class Kind { Zero, Constant, SquaredNorm, Codelength, Table, Adaptive };

  struct AdaptiveComponent {
    EpsGrid grid;
    std::shared_ptr<const Penalty> penalty;
  };

  static Penalty zero();
  static Penalty constant(double value);
  static Penalty squared_norm();
  static Penalty codelength(std::vector<double> pmf, CodelengthMode mode);
  static Penalty table(std::vector<double> values);
  static Penalty adaptive(std::vector<double> l0,
                          std::vector<AdaptiveComponent> models);

  Kind kind() const { return kind_; }
  bool grid_aligned() const {
    return kind_ == Kind::Codelength || kind_ == Kind::Table;
  }
  std::size_t table_size() const { return values_.size(); }
  CodelengthMode codelength_mode() const { return mode_; }
  double constant_value() const { return constant_; }

  /// Penalty at an enumerated grid point; the index identifies the point for
  /// grid-aligned variants and is ignored otherwise.
  double at(const Vector& theta, std::size_t enumeration_index) const;

  /// True when the penalty takes the same value at every grid point.
  bool constant_on_grid() const;

  bool twice_differentiable() const;
  Matrix hessian(const Vector& theta) const;

  /// Composite classes: model selector cost plus within-model penalty.
  double adaptive_value(int k, const Vector& theta,
                        std::size_t index_within_model) const;
  const std::vector<double>& model_costs() const;
  const std::vector<AdaptiveComponent>& models() const;

 private:
  explicit Penalty(Kind kind) : kind_(kind) {}

  Kind kind_;
  double constant_ = 0.0;
  std::vector<double> values_;  // codelength pmf or table values
  CodelengthMode mode_ = CodelengthMode::TwiceLogReciprocal;
  std::vector<double> l0_;
  std::vector<AdaptiveComponent> components_;
};

/// Auxiliary function added inside the bound's exponential sum; never part of
/// the estimator's objective.
class PseudoPenalty {
 public:
  enum class Kind {
    Zero,
    AlphaBhattacharyya,
    EntropyCodelength,
    Quadratic,
    AlphaTimesPenalty,
    Table,
  };

  static PseudoPenalty zero();
  /// L(theta) = alpha * n * D_B(P, P_theta), alpha in [0, 1].
  static PseudoPenalty alpha_bhattacharyya(double alpha);
  /// L(theta) = 2 log(1 / pmf(theta)), the estimator's own distribution.
  static PseudoPenalty entropy_codelength(std::vector<double> pmf);
  /// L(theta) = alpha ||theta - center||^2, alpha >= 0.
  static PseudoPenalty quadratic(double alpha, Vector center);
  static PseudoPenalty alpha_times_penalty(double alpha);
  static PseudoPenalty table(std::vector<double> values);

  Kind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  const Vector& center() const { return center_; }
  const std::vector<double>& values() const { return values_; }

 private:
  explicit PseudoPenalty(Kind kind) : kind_(kind) {}

  Kind kind_;
  double alpha_ = 0.0;
  Vector center_;
  std::vector<double> values_;
};

/// Context needed by pseudo-penalties that reference the data-generating
/// distribution.
struct PseudoContext {
  const Model* model = nullptr;
  const Vector* theta_true = nullptr;
  double n = 0.0;
};

/// L(theta) tabulated over the grid's enumerated points.
std::vector<double> pseudo_values(const PseudoPenalty& pseudo,
                                  const std::vector<Vector>& points,
                                  const Penalty& penalty,
                                  const PseudoContext& context = {});

struct KraftSum {
  double sum = 0.0;
  bool twice_kraft_ok = false;  // sum <= 1
};

/// Sum over the grid of exp(-(penalty + pseudo)/2).
KraftSum kraft_sum(const EpsGrid& grid, const Penalty& penalty,
                   const std::vector<double>* pseudo = nullptr,
                   std::size_t cap = kDefaultEnumerationCap);
KraftSum kraft_sum(const std::vector<Vector>& points, const Penalty& penalty,
                   const std::vector<double>* pseudo = nullptr);

/// Grid scan state reused across many fits of the same experiment.
struct MleWorkspace {
  const Model* model = nullptr;
  std::vector<Vector> points;
  std::vector<double> penalties;       // penalty at each point
  std::vector<double> log_partitions;  // psi at each point (exponential path)

  MleWorkspace(const Model& model, const EpsGrid& grid, const Penalty& penalty,
               std::size_t cap = kDefaultEnumerationCap);
};

struct MleResult {
  Vector theta;
  std::size_t index = 0;  // position in enumeration order
  double objective = 0.0;
};

/// argmin over the grid of (negative log-likelihood + penalty); ties go to
/// the smallest enumeration index.
MleResult penalized_mle(const MleWorkspace& workspace, const DataSample& data);
MleResult penalized_mle(const Model& model, const EpsGrid& grid,
                        const Penalty& penalty, const DataSample& data);

struct AdaptiveL0 {
  std::vector<double> l0;      // k sqrt(2) + 2 log S_k, k = 1, 2, ...
  double class_sum = 0.0;      // sum_k exp(-l0(k)/2) S_k = sum_k exp(-k/sqrt 2)
  bool twice_kraft_ok = false;
};

/// Model-selector costs that neutralize given within-model summations.
AdaptiveL0 build_adaptive_penalty(const std::vector<double>& per_model_sums);

}  // namespace resolv
