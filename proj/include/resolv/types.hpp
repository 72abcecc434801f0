#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace resolv {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejected input: out-of-domain arguments, malformed tables, bad sizes.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A stated hypothesis of a bound does not hold for the given parameters.
class HypothesisError : public Error {
 public:
  HypothesisError(std::string hypothesis, const std::string& detail)
      : Error(hypothesis + ": " + detail), hypothesis_(std::move(hypothesis)) {}
  const std::string& hypothesis() const { return hypothesis_; }

 private:
  std::string hypothesis_;
};

/// Numerical integration did not reach the requested tolerance.
class QuadratureError : public Error {
 public:
  QuadratureError(double achieved, double requested)
      : Error("quadrature error estimate " + std::to_string(achieved) +
              " exceeds requested tolerance " + std::to_string(requested)),
        achieved_(achieved),
        requested_(requested) {}
  double achieved_error() const { return achieved_; }
  double requested_tolerance() const { return requested_; }

 private:
  double achieved_;
  double requested_;
};

/// Axis-aligned box in R^d.
struct Box {
  Vector lo;
  Vector hi;

  int dim() const { return static_cast<int>(lo.size()); }

  bool contains(const Vector& v, double slack = 0.0) const {
    if (v.size() != lo.size()) return false;
    for (int j = 0; j < lo.size(); ++j) {
      if (v[j] < lo[j] - slack || v[j] > hi[j] + slack) return false;
    }
    return true;
  }

  /// First coordinate (if any) violating the box, for diagnostics. Returns -1 if inside.
  int violating_axis(const Vector& v, double slack = 0.0) const {
    for (int j = 0; j < lo.size(); ++j) {
      if (v[j] < lo[j] - slack || v[j] > hi[j] + slack) return j;
    }
    return -1;
  }

  Box expanded(double delta) const {
    return Box{lo.array() - delta, hi.array() + delta};
  }

  static Box centered(int d, double half_width) {
    return Box{Vector::Constant(d, -half_width), Vector::Constant(d, half_width)};
  }
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for sub-stream `index` of a master seed. Pure function, so replicated
/// work can be scheduled in any order without changing the draws.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 1));
}

/// Deterministic generator with explicit transforms. All draws are pure
/// functions of the seed and the call sequence, independent of platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1); safe to pass through log.
  double uniform_open() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller, pairs cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
  }

  /// Standard Laplace (unit scale) by inverse CDF.
  double laplace() {
    const double u = uniform_open();
    return u < 0.5 ? std::log(2.0 * u) : -std::log(2.0 * (1.0 - u));
  }

  double bernoulli(double p) { return uniform01() < p ? 1.0 : 0.0; }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  std::uint64_t next_u64() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Neumaier compensated accumulator; keeps long sums order-stable.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (!std::isfinite(t)) {
      sum_ = t;
      comp_ = 0.0;
      return;
    }
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace resolv
