#include "resolv/grid.hpp"

#include <algorithm>
#include <cmath>

#include "resolv/quadrature.hpp"

namespace resolv {

namespace {
constexpr double kIndexSlack = 1e-9;

long round_half_down(double t) {
  // Exact halves go to the smaller integer.
  return static_cast<long>(std::ceil(t - 0.5));
}
}  // namespace

EpsGrid EpsGrid::make(Vector offset, double eps, Box box) {
  if (!(eps > 0.0)) throw DomainError("EpsGrid: eps must be positive");
  if (offset.size() != box.lo.size()) {
    throw DomainError("EpsGrid: offset and box dimensions differ");
  }
  EpsGrid g;
  g.dim = static_cast<int>(offset.size());
  g.offset = std::move(offset);
  g.eps = eps;
  g.box = std::move(box);
  return g;
}

EpsGrid::AxisRange EpsGrid::axis_range(int axis) const {
  AxisRange r;
  r.lo = static_cast<long>(
      std::ceil((box.lo[axis] - offset[axis]) / eps - kIndexSlack));
  r.hi = static_cast<long>(
      std::floor((box.hi[axis] - offset[axis]) / eps + kIndexSlack));
  return r;
}

std::size_t EpsGrid::point_count() const {
  std::size_t count = 1;
  for (int j = 0; j < dim; ++j) {
    const long c = axis_range(j).count();
    if (c <= 0) return 0;
    count *= static_cast<std::size_t>(c);
  }
  return count;
}

Vector EpsGrid::point(const std::vector<long>& index) const {
  Vector p(dim);
  for (int j = 0; j < dim; ++j) p[j] = offset[j] + eps * index[j];
  return p;
}

bool EpsGrid::contains(const Vector& theta, double tol) const {
  if (theta.size() != dim || !box.contains(theta, tol)) return false;
  for (int j = 0; j < dim; ++j) {
    const double t = (theta[j] - offset[j]) / eps;
    if (std::abs(t - std::round(t)) > tol / eps) return false;
  }
  return true;
}

std::vector<Vector> enumerate_points(const EpsGrid& grid, std::size_t cap) {
  const std::size_t count = grid.point_count();
  if (count > cap) {
    throw DomainError("enumerate_points: grid has " + std::to_string(count) +
                      " points, cap is " + std::to_string(cap));
  }
  std::vector<Vector> points;
  points.reserve(count);
  if (count == 0) return points;

  std::vector<EpsGrid::AxisRange> ranges(grid.dim);
  std::vector<long> idx(grid.dim);
  for (int j = 0; j < grid.dim; ++j) {
    ranges[j] = grid.axis_range(j);
    idx[j] = ranges[j].lo;
  }
  // Lexicographic in the lattice index: last axis varies fastest.
  while (true) {
    points.push_back(grid.point(idx));
    int j = grid.dim - 1;
    while (j >= 0 && idx[j] == ranges[j].hi) {
      idx[j] = ranges[j].lo;
      --j;
    }
    if (j < 0) break;
    ++idx[j];
  }
  return points;
}

std::vector<long> nearest_index(const EpsGrid& grid, const Vector& theta) {
  if (theta.size() != grid.dim) {
    throw DomainError("nearest_index: dimension mismatch");
  }
  if (!grid.box.contains(theta, grid.eps / 2.0 + kIndexSlack)) {
    const int j = grid.box.violating_axis(theta, grid.eps / 2.0 + kIndexSlack);
    throw DomainError("nearest_index: theta[" + std::to_string(j) + "] = " +
                      std::to_string(theta[j]) +
                      " outside box expanded by eps/2");
  }
  std::vector<long> idx(grid.dim);
  for (int j = 0; j < grid.dim; ++j) {
    const EpsGrid::AxisRange r = grid.axis_range(j);
    if (r.count() == 0) throw DomainError("nearest_index: empty grid axis");
    long m = round_half_down((theta[j] - grid.offset[j]) / grid.eps);
    idx[j] = std::clamp(m, r.lo, r.hi);
  }
  return idx;
}

Vector nearest_point(const EpsGrid& grid, const Vector& theta) {
  return grid.point(nearest_index(grid, theta));
}

std::size_t enumeration_index(const EpsGrid& grid,
                              const std::vector<long>& index) {
  std::size_t flat = 0;
  for (int j = 0; j < grid.dim; ++j) {
    const EpsGrid::AxisRange r = grid.axis_range(j);
    flat = flat * static_cast<std::size_t>(r.count()) +
           static_cast<std::size_t>(index[j] - r.lo);
  }
  return flat;
}

double gaussian_sum_bound(double eps, double c, int d, bool peak_on_grid) {
  if (!(eps > 0.0) || !(c > 0.0) || d < 1) {
    throw DomainError("gaussian_sum_bound: eps, c must be positive, d >= 1");
  }
  const double k = peak_on_grid ? 1.0 : 2.0;
  return std::pow(1.0 + k * std::sqrt(M_PI) / (eps * std::sqrt(c)), d);
}

RadialEnvelope gaussian_envelope(double scale, double c, int d) {
  if (!(c > 0.0)) throw DomainError("gaussian_envelope: c must be positive");
  RadialEnvelope env;
  env.g = [scale, c](double r) { return scale * std::exp(-c * r * r); };
  // int_s^inf r^{d-1} e^{-c r^2} dr by the parts recursion
  //   I_d(s) = s^{d-2} e^{-c s^2}/(2c) + (d-2)/(2c) I_{d-2}(s).
  env.tail_integral = [scale, c, d](double s) {
    s = std::max(s, 0.0);
    double even = std::exp(-c * s * s) / (2.0 * c);                   // I_2
    double odd = std::sqrt(M_PI) * std::erfc(std::sqrt(c) * s) /
                 (2.0 * std::sqrt(c));                                // I_1
    if (d == 1) return scale * odd;
    if (d == 2) return scale * even;
    double value = (d % 2 == 0) ? even : odd;
    for (int k = (d % 2 == 0) ? 4 : 3; k <= d; k += 2) {
      value = std::pow(s, k - 2) * std::exp(-c * s * s) / (2.0 * c) +
              (k - 2) / (2.0 * c) * value;
    }
    return scale * value;
  };
  return env;
}

RadialEnvelope power_envelope(double scale, double q, int d) {
  if (!(q > d)) {
    throw DomainError("power_envelope: exponent must exceed the dimension");
  }
  RadialEnvelope env;
  env.g = [scale, q](double r) { return scale * std::pow(r, -q); };
  env.tail_integral = [scale, q, d](double s) {
    if (!(s > 0.0)) return std::numeric_limits<double>::infinity();
    return scale * std::pow(s, static_cast<double>(d) - q) / (q - d);
  };
  return env;
}

RadialEnvelope numeric_envelope(std::function<double(double)> g, int d) {
  RadialEnvelope env;
  env.g = g;
  env.tail_integral = [g, d](double s) {
    const auto weighted = [&](double r) {
      return g(r) * std::pow(r, d - 1);
    };
    return integrate_half_line(weighted, std::max(s, 0.0), 1e-12).value;
  };
  return env;
}

namespace {

// Remainder of a radial non-increasing envelope beyond `radius`.
// d = 1: right Riemann comparison on each side of the center,
//   sum <= 2 (g(radius) + (1/eps) int_radius^inf g).
// d >= 2: each lattice point p owns the disjoint cell p + [0, eps)^d, whose
//   points x satisfy |‖x-z‖ - ‖p-z‖| <= eps sqrt(d), so
//     g(‖p-z‖) <= eps^-d int_cell g(max(0, ‖x-z‖ - eps sqrt(d))) dx.
//   Radially, with s = r - eps sqrt(d) and (s + eps sqrt(d))^{d-1} <=
//   (2s)^{d-1} once s >= eps sqrt(d):
//     sum <= 2^{d-1} (2 pi^{d/2} / (eps^d Gamma(d/2)))
//            int_{radius - 2 eps sqrt(d)}^inf g(s) s^{d-1} ds,
//   valid for radius >= 3 eps sqrt(d).
double envelope_tail_bound(const RadialEnvelope& env, double eps, int d,
                           double radius) {
  if (d == 1) {
    return 2.0 * (env.g(radius) + env.tail_integral(radius) / eps);
  }
  const double diag = eps * std::sqrt(double(d));
  if (radius < 3.0 * diag) {
    throw DomainError(
        "truncated_grid_sum: the analytic remainder needs a truncation "
        "radius of at least 3 eps sqrt(d)");
  }
  const double coeff = std::pow(2.0, d - 1) * 2.0 * std::pow(M_PI, 0.5 * d) /
                       (std::pow(eps, d) * std::tgamma(0.5 * d));
  return coeff * env.tail_integral(radius - 2.0 * diag);
}

template <typename PointFn>
TruncatedSum sum_ball(const Vector& center, double radius, double eps, int d,
                      const Vector& offset,
                      const std::function<double(const Vector&)>& f,
                      PointFn in_range, std::size_t cap) {
  std::vector<long> lo(d), hi(d), idx(d);
  std::size_t count = 1;
  for (int j = 0; j < d; ++j) {
    lo[j] = static_cast<long>(
        std::ceil((center[j] - radius - offset[j]) / eps - kIndexSlack));
    hi[j] = static_cast<long>(
        std::floor((center[j] + radius - offset[j]) / eps + kIndexSlack));
    if (hi[j] < lo[j]) return {};
    count *= static_cast<std::size_t>(hi[j] - lo[j] + 1);
    idx[j] = lo[j];
  }
  if (count > cap) {
    throw DomainError("truncated_grid_sum: bounding box has " +
                      std::to_string(count) + " points, cap is " +
                      std::to_string(cap));
  }

  TruncatedSum out;
  CompensatedSum acc;
  Vector p(d);
  const double r2 = radius * radius;
  while (true) {
    for (int j = 0; j < d; ++j) p[j] = offset[j] + eps * idx[j];
    if ((p - center).squaredNorm() <= r2 * (1.0 + 1e-12) && in_range(idx)) {
      const double v = f(p);
      if (v < 0.0) {
        throw DomainError("truncated_grid_sum: summand is negative");
      }
      acc.add(v);
      ++out.points;
    }
    int j = d - 1;
    while (j >= 0 && idx[j] == hi[j]) {
      idx[j] = lo[j];
      --j;
    }
    if (j < 0) break;
    ++idx[j];
  }
  out.sum = acc.value();
  return out;
}

}  // namespace

TruncatedSum truncated_grid_sum(const LatticeSpec& lattice,
                                const std::function<double(const Vector&)>& f,
                                const Vector& center, double radius,
                                const RadialEnvelope* envelope,
                                std::size_t cap) {
  if (envelope == nullptr) {
    throw DomainError(
        "truncated_grid_sum: an infinite lattice needs a tail envelope");
  }
  TruncatedSum out =
      sum_ball(center, radius, lattice.eps, lattice.dim, lattice.offset, f,
               [](const std::vector<long>&) { return true; }, cap);
  out.tail_bound =
      envelope_tail_bound(*envelope, lattice.eps, lattice.dim, radius);
  return out;
}

TruncatedSum truncated_grid_sum(const EpsGrid& grid,
                                const std::function<double(const Vector&)>& f,
                                const Vector& center, double radius,
                                const RadialEnvelope* envelope,
                                std::size_t cap) {
  TruncatedSum out = sum_ball(
      center, radius, grid.eps, grid.dim, grid.offset, f,
      [&](const std::vector<long>& idx) {
        for (int j = 0; j < grid.dim; ++j) {
          const EpsGrid::AxisRange r = grid.axis_range(j);
          if (idx[j] < r.lo || idx[j] > r.hi) return false;
        }
        return true;
      },
      cap);
  if (envelope != nullptr) {
    out.tail_bound = envelope_tail_bound(*envelope, grid.eps, grid.dim, radius);
  } else {
    // Without an envelope the ball must cover the whole grid.
    for (int j = 0; j < grid.dim; ++j) {
      if (grid.box.lo[j] < center[j] - radius - kIndexSlack ||
          grid.box.hi[j] > center[j] + radius + kIndexSlack) {
        throw DomainError(
            "truncated_grid_sum: grid extends beyond the radius and no "
            "envelope was supplied");
      }
    }
  }
  return out;
}

double tail_coefficient_exact(double eps, int d) {
  return 2.0 * std::pow(M_PI, 0.5 * d) /
         (std::pow(eps / 4.0, d) * std::tgamma(0.5 * d));
}

double tail_coefficient_stirling(double eps, int d) {
  return std::pow(20.0 / (eps * std::sqrt(double(d))), d);
}

TailBound tail_sum_integral_bound(const RadialEnvelope& envelope, double eps,
                                  int d, double R) {
  if (!(R >= 3.0 * eps)) {
    throw HypothesisError("R >= 3 eps",
                          "tail bound requires R = " + std::to_string(R) +
                              " >= 3 eps = " + std::to_string(3.0 * eps));
  }
  const double integral = envelope.tail_integral(R / 4.0);
  return TailBound{tail_coefficient_exact(eps, d) * integral,
                   tail_coefficient_stirling(eps, d) * integral};
}

double power_sum_bound(double eps, int d, double R, double q) {
  if (!(R >= 3.0 * eps)) {
    throw HypothesisError("R >= 3 eps",
                          "power sum bound requires R = " + std::to_string(R) +
                              " >= 3 eps = " + std::to_string(3.0 * eps));
  }
  if (!(q > d)) {
    throw HypothesisError("q > d", "the lattice sum diverges for q <= d");
  }
  return tail_coefficient_stirling(eps, d) * std::pow(4.0 / R, q - d) /
         (q - d);
}

const char* to_string(PowerDecayRegime regime) {
  switch (regime) {
    case PowerDecayRegime::LargeSample:
      return "large-sample";
    case PowerDecayRegime::Middle:
      return "middle";
    case PowerDecayRegime::SmallSample:
      return "small-sample";
    case PowerDecayRegime::LargeMiddleBoundary:
      return "large/middle boundary";
    case PowerDecayRegime::MiddleSmallBoundary:
      return "middle/small boundary";
  }
  return "?";
}

PowerDecayBound power_decay_regime_bound(double eps, int d, double R, double a,
                                         double b, double alpha, double n,
                                         double kappa,
                                         double theta_star_norm) {
  if (!(a > 0.0) || !(b > 0.0) || !(alpha > 0.0) || !(eps > 0.0) || d < 1) {
    throw DomainError("power_decay_regime_bound: a, b, alpha, eps must be "
                      "positive and d >= 1");
  }
  const double a_root = std::pow(a, 1.0 / b);
  if (!(R >= std::max(4.0 * a_root, 3.0 * eps))) {
    throw HypothesisError(
        "R >= 4 a^{1/b} v 3 eps",
        "R = " + std::to_string(R) + ", 4 a^{1/b} = " +
            std::to_string(4.0 * a_root) + ", 3 eps = " +
            std::to_string(3.0 * eps));
  }
  if (kappa < 0.0) throw DomainError("power_decay_regime_bound: kappa < 0");

  const double hi = (d + 1) / (alpha * b);
  const double lo = (d - 1) / (alpha * b);

  const auto large_value = [&]() {
    const double log_ratio = std::log(R / (4.0 * a_root));
    if (!(log_ratio > 0.0)) {
      throw HypothesisError("R > 4 a^{1/b}",
                            "large-sample bound needs log(R / 4 a^{1/b}) > 0");
    }
    return std::pow(4.0 * R / (eps * std::sqrt(n * alpha * b * log_ratio)), d);
  };
  const double boost = std::exp(kappa * theta_star_norm * theta_star_norm);
  const auto middle_value = [&]() {
    return boost * std::pow(20.0 / (eps * std::sqrt(n * alpha * b)), d) *
           (22.0 / (R * R * R) + 2.0 * std::sqrt(kappa));
  };
  const auto small_value = [&]() {
    const double top = 4.0 * std::sqrt(2.0 * M_PI * M_E) *
                       std::sqrt(std::max(double(d), std::pow(a, 2.0 / b) * kappa));
    return 2.0 * boost *
           std::pow(top / (eps * std::sqrt(n * alpha * b * kappa)), d);
  };
  const auto require_kappa = [&](const char* where) {
    if (!(kappa > 0.0)) {
      throw HypothesisError(
          "kappa > 0",
          std::string("no regime applies: the ") + where +
              " bound needs a positive quadratic weight (missing penalty)");
    }
  };

  if (n > hi) return {large_value(), PowerDecayRegime::LargeSample};
  if (n == hi) {
    double v = large_value();
    if (kappa > 0.0) v = std::min(v, middle_value());
    return {v, PowerDecayRegime::LargeMiddleBoundary};
  }
  if (n > lo) {
    require_kappa("middle-regime");
    return {middle_value(), PowerDecayRegime::Middle};
  }
  if (n == lo && lo > 0.0) {
    require_kappa("boundary");
    return {std::min(middle_value(), small_value()),
            PowerDecayRegime::MiddleSmallBoundary};
  }
  require_kappa("small-sample");
  return {small_value(), PowerDecayRegime::SmallSample};
}

}  // namespace resolv
