#include "resolv/models.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <utility>

namespace resolv {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double sigmoid(double t) {
  return t >= 0.0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
}

double log1p_exp(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z - 0.5 * kLog2Pi);
}

// E ||Z|| for a standard normal vector in R^d: sqrt(2) Gamma((d+1)/2) / Gamma(d/2).
double gaussian_mean_norm(int d) {
  return M_SQRT2 * std::tgamma(0.5 * (d + 1)) / std::tgamma(0.5 * d);
}

// E ||X|| for d iid unit Laplace coordinates. d = 2 value frozen from
// high-precision quadrature of E sqrt(X^2 + Y^2); re-checked in tests.
double laplace_mean_norm(int d) {
  switch (d) {
    case 1:
      return 1.0;
    case 2:
      return 1.6232252401402305;
    default:
      throw DomainError("laplace_location supports dim 1 or 2");
  }
}

}  // namespace

Model::Model(FamilyId id, int dim, std::string name)
    : id_(id), dim_(dim), name_(std::move(name)) {}

Model Model::gaussian_location(int dim) {
  if (dim < 1 || dim > 3) {
    throw DomainError("gaussian_location supports dim 1..3, got " +
                      std::to_string(dim));
  }
  Model m(FamilyId::GaussianLocation, dim, "gaussian-location");
  m.exp_.dim = dim;
  m.exp_.sufficient_statistic = [](const Vector& x) { return x; };
  m.exp_.log_partition = [](const Vector& t) { return 0.5 * t.squaredNorm(); };
  m.exp_.carrier_log = [dim](const Vector& x) {
    return -0.5 * x.squaredNorm() - 0.5 * dim * kLog2Pi;
  };
  m.exp_.natural_domain = Box::centered(dim, 1e8);
  m.exp_.log_partition_hessian = [dim](const Vector&) {
    return Matrix(Matrix::Identity(dim, dim));
  };
  m.loc_.dim = dim;
  m.loc_.base_log_density = [dim](const Vector& x) {
    return -0.5 * x.squaredNorm() - 0.5 * dim * kLog2Pi;
  };
  m.loc_.first_central_moment = gaussian_mean_norm(dim);
  m.loc_.median_offset = Vector::Zero(dim);
  return m;
}

Model Model::bernoulli_natural() {
  Model m(FamilyId::BernoulliNatural, 1, "bernoulli-natural");
  m.exp_.dim = 1;
  m.exp_.sufficient_statistic = [](const Vector& x) { return x; };
  m.exp_.log_partition = [](const Vector& t) { return log1p_exp(t[0]); };
  m.exp_.carrier_log = [](const Vector&) { return 0.0; };
  m.exp_.natural_domain = Box::centered(1, 500.0);
  m.exp_.log_partition_hessian = [](const Vector& t) {
    const double p = sigmoid(t[0]);
    Matrix h(1, 1);
    h(0, 0) = p * (1.0 - p);
    return h;
  };
  return m;
}

Model Model::laplace_location(int dim) {
  if (dim < 1 || dim > 2) {
    throw DomainError("laplace_location supports dim 1 or 2, got " +
                      std::to_string(dim));
  }
  Model m(FamilyId::LaplaceLocation, dim, "laplace-location");
  m.loc_.dim = dim;
  m.loc_.base_log_density = [dim](const Vector& x) {
    return -x.lpNorm<1>() - dim * M_LN2;
  };
  m.loc_.first_central_moment = laplace_mean_norm(dim);
  m.loc_.median_offset = Vector::Zero(dim);
  return m;
}

Model Model::from_name(const std::string& name, int dim) {
  if (name == "gaussian-location") return gaussian_location(dim);
  if (name == "bernoulli-natural") {
    if (dim != 1) throw DomainError("bernoulli-natural requires dim 1");
    return bernoulli_natural();
  }
  if (name == "laplace-location") return laplace_location(dim);
  throw DomainError("unknown family id: " + name);
}

const ExponentialFamily& Model::exponential() const {
  if (!is_exponential()) {
    throw DomainError(name_ + " is not an exponential family");
  }
  return exp_;
}

const LocationFamily& Model::location() const {
  if (!is_location()) {
    throw DomainError(name_ + " is not a location family");
  }
  return loc_;
}

Box Model::default_domain() const {
  switch (id_) {
    case FamilyId::BernoulliNatural:
      return Box::centered(1, 1.0);
    default:
      return Box::centered(dim_, 6.0);
  }
}

void Model::check_theta(const Vector& theta) const {
  if (theta.size() != dim_) {
    throw DomainError(name_ + ": parameter has dimension " +
                      std::to_string(theta.size()) + ", expected " +
                      std::to_string(dim_));
  }
  if (is_exponential()) {
    const int j = exp_.natural_domain.violating_axis(theta);
    if (j >= 0) {
      throw DomainError(name_ + ": theta[" + std::to_string(j) + "] = " +
                        std::to_string(theta[j]) + " outside natural domain");
    }
  }
}

double Model::log_density(const Vector& theta, const Vector& x) const {
  check_theta(theta);
  if (x.size() != dim_) {
    throw DomainError(name_ + ": observation has dimension " +
                      std::to_string(x.size()) + ", expected " +
                      std::to_string(dim_));
  }
  switch (id_) {
    case FamilyId::GaussianLocation:
      return -0.5 * (x - theta).squaredNorm() - 0.5 * dim_ * kLog2Pi;
    case FamilyId::BernoulliNatural: {
      if (x[0] != 0.0 && x[0] != 1.0) {
        throw DomainError("bernoulli-natural: x[0] = " + std::to_string(x[0]) +
                          " outside support {0, 1}");
      }
      return theta[0] * x[0] - log1p_exp(theta[0]);
    }
    case FamilyId::LaplaceLocation:
      return -(x - theta).lpNorm<1>() - dim_ * M_LN2;
  }
  throw Error("unreachable");
}

DataSample Model::sample(const Vector& theta, int n, std::uint64_t seed) const {
  check_theta(theta);
  if (n < 1) throw DomainError("sample: n must be >= 1, got " + std::to_string(n));
  Matrix points(n, dim_);
  Rng rng(seed);
  switch (id_) {
    case FamilyId::GaussianLocation:
      for (int r = 0; r < n; ++r)
        for (int j = 0; j < dim_; ++j) points(r, j) = theta[j] + rng.normal();
      break;
    case FamilyId::BernoulliNatural: {
      const double p = sigmoid(theta[0]);
      for (int r = 0; r < n; ++r) points(r, 0) = rng.bernoulli(p);
      break;
    }
    case FamilyId::LaplaceLocation:
      for (int r = 0; r < n; ++r)
        for (int j = 0; j < dim_; ++j) points(r, j) = theta[j] + rng.laplace();
      break;
  }
  return DataSample{std::move(points), seed};
}

double Model::hellinger_affinity(const Vector& a, const Vector& b) const {
  check_theta(a);
  check_theta(b);
  if (is_exponential()) {
    // exp(psi((a+b)/2) - (psi(a) + psi(b)) / 2), the Jensen gap of psi.
    const double gap = 0.5 * (exp_.log_partition(a) + exp_.log_partition(b)) -
                       exp_.log_partition(0.5 * (a + b));
    return std::min(1.0, std::exp(-gap));
  }
  const QuadratureResult q = quadrature_affinity(*this, a, b);
  return std::min(1.0, q.value);
}

double Model::bhattacharyya(const Vector& a, const Vector& b) const {
  return -2.0 * std::log(hellinger_affinity(a, b));
}

double Model::squared_hellinger(const Vector& a, const Vector& b) const {
  return 2.0 * (1.0 - hellinger_affinity(a, b));
}

double Model::kl_divergence(const Vector& a, const Vector& b) const {
  check_theta(a);
  check_theta(b);
  switch (id_) {
    case FamilyId::GaussianLocation:
      return 0.5 * (a - b).squaredNorm();
    case FamilyId::BernoulliNatural:
      // Bregman divergence of the log-partition.
      return exp_.log_partition(b) - exp_.log_partition(a) -
             (b[0] - a[0]) * sigmoid(a[0]);
    case FamilyId::LaplaceLocation: {
      double kl = 0.0;
      for (int j = 0; j < dim_; ++j) {
        const double d = std::abs(a[j] - b[j]);
        kl += d + std::exp(-d) - 1.0;
      }
      return kl;
    }
  }
  throw Error("unreachable");
}

Matrix Model::log_partition_hessian(const Vector& theta) const {
  check_theta(theta);
  return exponential().log_partition_hessian(theta);
}

Vector Model::mean(const Vector& theta) const {
  check_theta(theta);
  if (id_ == FamilyId::BernoulliNatural) {
    return Vector::Constant(1, sigmoid(theta[0]));
  }
  return theta;
}

Vector Model::marginal_median(const Vector& theta) const {
  check_theta(theta);
  if (id_ == FamilyId::BernoulliNatural) {
    const double p = sigmoid(theta[0]);
    return Vector::Constant(1, (1.0 - p) >= 0.5 ? 0.0 : 1.0);
  }
  return theta + loc_.median_offset;
}

double Model::mean_deviation(const Vector& theta) const {
  check_theta(theta);
  switch (id_) {
    case FamilyId::GaussianLocation:
      return gaussian_mean_norm(dim_);
    case FamilyId::BernoulliNatural: {
      const double p = sigmoid(theta[0]);
      return 2.0 * p * (1.0 - p);
    }
    case FamilyId::LaplaceLocation:
      return laplace_mean_norm(dim_);
  }
  throw Error("unreachable");
}

double Model::marginal_cdf(const Vector& theta, int axis, double x) const {
  check_theta(theta);
  switch (id_) {
    case FamilyId::GaussianLocation:
      return normal_cdf(x - theta[axis]);
    case FamilyId::BernoulliNatural: {
      const double p = sigmoid(theta[0]);
      if (x < 0.0) return 0.0;
      if (x < 1.0) return 1.0 - p;
      return 1.0;
    }
    case FamilyId::LaplaceLocation: {
      const double z = x - theta[axis];
      return z < 0.0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
    }
  }
  throw Error("unreachable");
}

double Model::marginal_density(const Vector& theta, int axis, double x) const {
  check_theta(theta);
  switch (id_) {
    case FamilyId::GaussianLocation:
      return normal_pdf(x - theta[axis]);
    case FamilyId::BernoulliNatural:
      throw DomainError("bernoulli-natural has no Lebesgue density");
    case FamilyId::LaplaceLocation:
      return 0.5 * std::exp(-std::abs(x - theta[axis]));
  }
  throw Error("unreachable");
}

double gaussian_decay_constant(const Model& family, const Box& domain) {
  const ExponentialFamily& fam = family.exponential();
  if (domain.dim() != fam.dim) {
    throw DomainError("gaussian_decay_constant: domain dimension mismatch");
  }
  const int d = fam.dim;
  constexpr int kMeshPerAxis = 101;

  double min_eig = std::numeric_limits<double>::infinity();
  Vector worst = domain.lo;
  const auto consider = [&](const Vector& theta) {
    const Matrix h = fam.log_partition_hessian(theta);
    double lambda;
    if (d == 1) {
      lambda = h(0, 0);
    } else {
      Eigen::SelfAdjointEigenSolver<Matrix> solver(h,
                                                   Eigen::EigenvaluesOnly);
      lambda = solver.eigenvalues().minCoeff();
    }
    if (lambda < min_eig) {
      min_eig = lambda;
      worst = theta;
    }
  };

  // Full tensor mesh; the built-in Hessians are monotone per axis, so the
  // mesh extrema bound the infimum.
  std::vector<long> idx(d, 0);
  Vector theta(d);
  bool done = false;
  while (!done) {
    for (int j = 0; j < d; ++j) {
      const double t = static_cast<double>(idx[j]) / (kMeshPerAxis - 1);
      theta[j] = domain.lo[j] + t * (domain.hi[j] - domain.lo[j]);
    }
    consider(theta);
    int j = 0;
    while (j < d && ++idx[j] == kMeshPerAxis) {
      idx[j] = 0;
      ++j;
    }
    done = (j == d);
  }
  // Corner points are part of the mesh above (t = 0 and t = 1), but keep an
  // explicit pass in case an axis degenerates.
  for (int corner = 0; corner < (1 << d); ++corner) {
    for (int j = 0; j < d; ++j) {
      theta[j] = (corner >> j) & 1 ? domain.hi[j] : domain.lo[j];
    }
    consider(theta);
  }

  if (!(min_eig > 0.0)) {
    throw Error("gaussian_decay_constant: eigenvalue infimum " +
                std::to_string(min_eig) + " at mesh point [" +
                std::to_string(worst[0]) + ", ...] is not positive");
  }
  return min_eig / 8.0;
}

Matrix fisher_cross_information(const Model& family, const Vector& theta) {
  return family.log_partition_hessian(theta);
}

Matrix fisher_cross_information_fd(const Model& family, const Vector& theta) {
  const ExponentialFamily& fam = family.exponential();
  const int d = fam.dim;
  const double h = 1e-4 * (1.0 + theta.norm());
  const auto psi = [&](const Vector& t) { return fam.log_partition(t); };

  Matrix out(d, d);
  for (int i = 0; i < d; ++i) {
    Vector tp = theta, tm = theta;
    tp[i] += h;
    tm[i] -= h;
    out(i, i) = (psi(tp) - 2.0 * psi(theta) + psi(tm)) / (h * h);
    for (int j = i + 1; j < d; ++j) {
      Vector tpp = theta, tpm = theta, tmp = theta, tmm = theta;
      tpp[i] += h;
      tpp[j] += h;
      tpm[i] += h;
      tpm[j] -= h;
      tmp[i] -= h;
      tmp[j] += h;
      tmm[i] -= h;
      tmm[j] -= h;
      const double v =
          (psi(tpp) - psi(tpm) - psi(tmp) + psi(tmm)) / (4.0 * h * h);
      out(i, j) = v;
      out(j, i) = v;
    }
  }

  const Matrix skew = out - out.transpose();
  const double tol = 1e-8 * std::max(1.0, out.cwiseAbs().maxCoeff());
  if (skew.cwiseAbs().maxCoeff() > tol) {
    throw Error("fisher_cross_information_fd: estimate is not symmetric "
                "within tolerance");
  }
  return 0.5 * (out + out.transpose());
}

QuadratureResult quadrature_affinity(
    const std::function<double(double)>& p_log_density,
    const std::function<double(double)>& q_log_density,
    const IntegrationSpec& spec) {
  const auto integrand = [&](double x) {
    return std::exp(0.5 * (p_log_density(x) + q_log_density(x)));
  };
  std::vector<double> cuts{spec.lo};
  for (double b : spec.breakpoints) {
    if (b > spec.lo && b < spec.hi) cuts.push_back(b);
  }
  cuts.push_back(spec.hi);
  std::sort(cuts.begin(), cuts.end());

  QuadratureResult total;
  const double piece_tol = spec.abs_tol / static_cast<double>(cuts.size() - 1);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    const QuadratureResult part =
        integrate(integrand, cuts[i], cuts[i + 1], piece_tol);
    total.value += part.value;
    total.error += part.error;
  }
  return total;
}

QuadratureResult quadrature_affinity(const Model& family, const Vector& a,
                                     const Vector& b, double abs_tol) {
  if (family.id() == FamilyId::BernoulliNatural) {
    const double pa = sigmoid(a[0]);
    const double pb = sigmoid(b[0]);
    return {std::sqrt(pa * pb) + std::sqrt((1.0 - pa) * (1.0 - pb)), 0.0};
  }

  // Independent coordinates: the affinity factors over axes. Integration
  // range per axis covers both centers, padded far enough that the omitted
  // tail mass stays below 1e-12 (the exponential-tailed base needs 30 units,
  // the gaussian one 12).
  const int d = family.dim();
  const double padding =
      family.id() == FamilyId::LaplaceLocation ? 30.0 : 12.0;
  double value = 1.0;
  double error = 0.0;
  const double per_axis_tol = abs_tol / d;
  for (int j = 0; j < d; ++j) {
    Vector ea = Vector::Zero(1), eb = Vector::Zero(1);
    ea[0] = a[j];
    eb[0] = b[j];
    const Model marginal = family.id() == FamilyId::GaussianLocation
                               ? Model::gaussian_location(1)
                               : Model::laplace_location(1);
    const auto pl = [&](double x) {
      return marginal.log_density(ea, Vector::Constant(1, x));
    };
    const auto ql = [&](double x) {
      return marginal.log_density(eb, Vector::Constant(1, x));
    };
    IntegrationSpec spec;
    spec.lo = std::min(a[j], b[j]) - padding;
    spec.hi = std::max(a[j], b[j]) + padding;
    spec.abs_tol = per_axis_tol;
    spec.breakpoints = {a[j], b[j]};
    const QuadratureResult r = quadrature_affinity(pl, ql, spec);
    value *= r.value;
    error += r.error;
  }
  return {value, error};
}

}  // namespace resolv
