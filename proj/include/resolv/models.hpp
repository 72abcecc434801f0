#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "resolv/quadrature.hpp"
#include "resolv/types.hpp"

namespace resolv {

/// Natural exponential family in R^d:
///   log p_theta(x) = carrier_log(x) + theta . phi(x) - psi(theta).
struct ExponentialFamily {
  int dim = 0;
  std::function<Vector(const Vector&)> sufficient_statistic;  // phi
  std::function<double(const Vector&)> log_partition;         // psi
  std::function<double(const Vector&)> carrier_log;           // log r
  Box natural_domain;
  /// Closed-form Hessian of psi (covariance of phi); empty for none.
  std::function<Matrix(const Vector&)> log_partition_hessian;
};

/// Family of densities p_theta(x) = base(x - theta) on R^d.
struct LocationFamily {
  int dim = 0;
  std::function<double(const Vector&)> base_log_density;  // centered member
  double first_central_moment = 0.0;  // E ||X - theta||, same for every member
  Vector median_offset;  // marginal medians of the centered member
};

struct DataSample {
  Matrix points;  // n rows, d columns
  std::optional<std::uint64_t> seed;  // empty when data came from outside

  int n() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
};

enum class FamilyId { GaussianLocation, BernoulliNatural, LaplaceLocation };

/// One of the built-in parametric families. All members are cheap to copy;
/// every operation is a pure function of its arguments.
class Model {
 public:
  static Model gaussian_location(int dim);
  static Model bernoulli_natural();
  static Model laplace_location(int dim);
  static Model from_name(const std::string& name, int dim);

  FamilyId id() const { return id_; }
  int dim() const { return dim_; }
  const std::string& name() const { return name_; }

  bool is_exponential() const { return id_ != FamilyId::LaplaceLocation; }
  const ExponentialFamily& exponential() const;
  bool is_location() const { return id_ != FamilyId::BernoulliNatural; }
  const LocationFamily& location() const;

  /// Parameter box the model is used over by default (certificate domains,
  /// decay constants). The densities themselves are defined on all of R^d.
  Box default_domain() const;

  double log_density(const Vector& theta, const Vector& x) const;
  DataSample sample(const Vector& theta, int n, std::uint64_t seed) const;

  double hellinger_affinity(const Vector& a, const Vector& b) const;
  double bhattacharyya(const Vector& a, const Vector& b) const;
  double squared_hellinger(const Vector& a, const Vector& b) const;
  double kl_divergence(const Vector& a, const Vector& b) const;

  Matrix log_partition_hessian(const Vector& theta) const;

  Vector mean(const Vector& theta) const;
  Vector marginal_median(const Vector& theta) const;
  /// E ||X - E X|| under P_theta.
  double mean_deviation(const Vector& theta) const;
  double marginal_cdf(const Vector& theta, int axis, double x) const;
  double marginal_density(const Vector& theta, int axis, double x) const;

 private:
  Model(FamilyId id, int dim, std::string name);
  void check_theta(const Vector& theta) const;

  FamilyId id_;
  int dim_;
  std::string name_;
  ExponentialFamily exp_;
  LocationFamily loc_;
};

/// Decay constant c with A(P_a, P_b) <= exp(-c ||a - b||^2) over the given
/// parameter box: one eighth of the smallest eigenvalue of the sufficient
/// statistic's covariance, minimized over a mesh of the box.
double gaussian_decay_constant(const Model& family, const Box& domain);

/// E_{X~P} of the Hessian (in theta) of log 1/p_theta(X). For the built-in
/// exponential families this is the log-partition Hessian and does not depend
/// on the data-generating distribution P.
Matrix fisher_cross_information(const Model& family, const Vector& theta);

/// Central-difference estimate of the same matrix, step 1e-4 (1 + |theta|).
/// Fails if the symmetrized residual exceeds 1e-8.
Matrix fisher_cross_information_fd(const Model& family, const Vector& theta);

struct IntegrationSpec {
  double lo = 0.0;
  double hi = 0.0;
  double abs_tol = 1e-10;
  /// Interior points where an integrand is non-smooth (density kinks);
  /// the integration splits there so the rule sees smooth pieces.
  std::vector<double> breakpoints;
};

/// Hellinger affinity of two one-dimensional densities by adaptive
/// quadrature: integral of sqrt(p q) over the spec's range.
QuadratureResult quadrature_affinity(
    const std::function<double(double)>& p_log_density,
    const std::function<double(double)>& q_log_density,
    const IntegrationSpec& spec);

/// Affinity of two members of a built-in family by quadrature (exact finite
/// sum for the discrete family). Oracle for the closed forms.
QuadratureResult quadrature_affinity(const Model& family, const Vector& a,
                                     const Vector& b, double abs_tol = 1e-10);

}  // namespace resolv
