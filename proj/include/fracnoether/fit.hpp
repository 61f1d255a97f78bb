#pragma once

#include "fracnoether/grid.hpp"

#include <span>

namespace fracnoether {

/// Least-squares slope of log(y) against log(x); pairs with y <= 0 are
/// skipped. Returns NaN when fewer than two usable pairs remain.
double fit_loglog_slope(std::span<const double> x, std::span<const double> y);

/// max over on-grid subintervals [t_i, t_j] of |trapezoid integral of f|.
double max_subinterval_integral(const GridFn& f);

/// Tracks agreement between analytic and finite-difference partials.
struct PartialCheck {
  std::string name;
  double max_rel_error = 0.0;
  bool pass = true;

  // Passes when |analytic - fd| <= rel_tol * max(1, |analytic|, |fd|).
  void add(double analytic, double fd, double rel_tol = 1e-6);
};

/// Central difference of a scalar function along coordinate j of x, step
/// 1e-6 * max(1, |x_j|).
double central_difference(const std::function<double(const Vec&)>& fn, const Vec& x,
                          Eigen::Index j);

}  // namespace fracnoether
