#pragma once

#include <functional>

#include "resolv/types.hpp"

namespace resolv {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // conservative estimate of the absolute error
};

/// Adaptive Gauss-Kronrod (G7/K15) integration of f over [a, b].
/// Throws QuadratureError (carrying the achieved estimate) if the interval
/// budget is exhausted before the absolute tolerance is met.
QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, double abs_tol = 1e-10,
                           int max_intervals = 4000);

/// Integral of f over [a, infinity) by doubling windows; f must decay.
QuadratureResult integrate_half_line(const std::function<double(double)>& f,
                                     double a, double abs_tol = 1e-10,
                                     double initial_window = 1.0);

}  // namespace resolv
