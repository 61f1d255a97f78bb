#pragma once

#include "fracnoether/grid.hpp"

#include <functional>
#include <optional>
#include <string>

namespace fracnoether {

struct NewtonOptions {
  double tol = 1e-10;     // sup-norm of the residual
  int max_iter = 50;
  double damping = 1.0;   // initial step length in (0, 1]
  double step_floor = 0x1p-20;
};

struct NewtonResult {
  Vec x;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  // Index of the unknown whose LU pivot vanished, if the Jacobian was singular.
  std::optional<Eigen::Index> singular_unknown;
  std::string message;
};

using ResidualFn = std::function<Vec(const Vec&)>;
using JacobianFn = std::function<Mat(const Vec&)>;

/// Forward-difference Jacobian, step rel_step * max(1, |x_j|).
Mat fd_jacobian(const ResidualFn& residual, const Vec& x, double rel_step = 1e-7);

/// Damped Newton with dense LU. The step is halved until the residual
/// sup-norm decreases, down to options.step_floor.
NewtonResult solve_newton(const ResidualFn& residual, const JacobianFn& jacobian, Vec x0,
                          const NewtonOptions& options);

}  // namespace fracnoether
