#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "resolv/types.hpp"

namespace resolv {

inline constexpr std::size_t kDefaultEnumerationCap = 10'000'000;

/// The lattice {offset + eps * m : m in Z^d} clipped to an axis-aligned box.
struct EpsGrid {
  Vector offset;
  double eps = 1.0;
  int dim = 0;
  Box box;

  struct AxisRange {
    long lo = 0;
    long hi = -1;
    long count() const { return hi >= lo ? hi - lo + 1 : 0; }
  };

  AxisRange axis_range(int axis) const;
  std::size_t point_count() const;
  Vector point(const std::vector<long>& index) const;
  /// Lattice membership (up to rounding slack) and box membership.
  bool contains(const Vector& theta, double tol = 1e-9) const;

  static EpsGrid make(Vector offset, double eps, Box box);
};

/// All grid points in lexicographic order of the lattice index.
std::vector<Vector> enumerate_points(const EpsGrid& grid,
                                     std::size_t cap = kDefaultEnumerationCap);

/// Lattice index of the closest grid point; exact halves round to the
/// smaller index. Requires theta within the box expanded by eps/2 per axis.
std::vector<long> nearest_index(const EpsGrid& grid, const Vector& theta);
Vector nearest_point(const EpsGrid& grid, const Vector& theta);
/// Position of an enumerated point in enumerate_points order.
std::size_t enumeration_index(const EpsGrid& grid, const std::vector<long>& index);

/// Bound on sum over the lattice of exp(-c ||theta - v||^2):
///   (1 + sqrt(pi)/(eps sqrt(c)))^d   when the peak v is a lattice point,
///   (1 + 2 sqrt(pi)/(eps sqrt(c)))^d for arbitrary v.
double gaussian_sum_bound(double eps, double c, int d, bool peak_on_grid);

/// Unbounded lattice offset + eps Z^d.
struct LatticeSpec {
  Vector offset;
  double eps = 1.0;
  int dim = 0;
};

/// Non-increasing radial envelope g with its weighted tail integral
/// s -> int_s^inf g(r) r^{d-1} dr. Used both for remainder bounds of
/// truncated sums and for the tail-summation machinery.
struct RadialEnvelope {
  std::function<double(double)> g;
  std::function<double(double)> tail_integral;
};

RadialEnvelope gaussian_envelope(double scale, double c, int d);
RadialEnvelope power_envelope(double scale, double q, int d);  // scale * r^-q, q > d
/// Envelope with the tail integral evaluated by adaptive quadrature.
RadialEnvelope numeric_envelope(std::function<double(double)> g, int d);

struct TruncatedSum {
  double sum = 0.0;
  double tail_bound = 0.0;
  std::size_t points = 0;
};

/// Exact sum of f over lattice points within `radius` of `center`, plus an
/// analytic bound on the remainder derived from the envelope (monotone
/// comparison with the envelope's tail integral). The envelope must dominate
/// f by distance from `center` outside the radius.
TruncatedSum truncated_grid_sum(const LatticeSpec& lattice,
                                const std::function<double(const Vector&)>& f,
                                const Vector& center, double radius,
                                const RadialEnvelope* envelope,
                                std::size_t cap = kDefaultEnumerationCap);

/// Bounded-grid variant: sums grid points inside the ball exactly; points of
/// the grid outside the ball are covered by the envelope (required if any).
TruncatedSum truncated_grid_sum(const EpsGrid& grid,
                                const std::function<double(const Vector&)>& f,
                                const Vector& center, double radius,
                                const RadialEnvelope* envelope = nullptr,
                                std::size_t cap = kDefaultEnumerationCap);

/// 2 pi^{d/2} / ((eps/4)^d Gamma(d/2)), and its Stirling relaxation
/// (20 / (eps sqrt(d)))^d.
double tail_coefficient_exact(double eps, int d);
double tail_coefficient_stirling(double eps, int d);

struct TailBound {
  double exact_gamma = 0.0;
  double stirling = 0.0;
};

/// Bound on the sum of g(||theta - center||) over lattice points farther than
/// R from the center: coefficient times int_{R/4}^inf g(r) r^{d-1} dr.
/// Requires R >= 3 eps.
TailBound tail_sum_integral_bound(const RadialEnvelope& envelope, double eps,
                                  int d, double R);

/// Bound on the sum of ||theta - center||^-q beyond radius R:
///   (20/(eps sqrt(d)))^d (4/R)^{q-d} / (q-d).  Requires R >= 3 eps, q > d.
double power_sum_bound(double eps, int d, double R, double q);

enum class PowerDecayRegime {
  LargeSample,
  Middle,
  SmallSample,
  LargeMiddleBoundary,
  MiddleSmallBoundary,
};
const char* to_string(PowerDecayRegime regime);

struct PowerDecayBound {
  double value = 0.0;
  PowerDecayRegime regime = PowerDecayRegime::LargeSample;
};

/// Bound on the sum of exp(-kappa ||theta||^2) (a / ||theta - theta*||^b)^(alpha n)
/// over lattice points beyond radius R of theta*, dispatched on the sample
/// size regime. kappa = 0 is allowed only in the large-sample regime; at the
/// exact regime boundaries the minimum of the adjacent bounds is returned.
PowerDecayBound power_decay_regime_bound(double eps, int d, double R, double a,
                                         double b, double alpha, double n,
                                         double kappa, double theta_star_norm);

}  // namespace resolv
