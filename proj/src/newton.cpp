#include "fracnoether/newton.hpp"

#include <cmath>
#include <stdexcept>

namespace fracnoether {

namespace {

double sup_norm(const Vec& r) { return r.size() == 0 ? 0.0 : r.cwiseAbs().maxCoeff(); }

std::optional<Eigen::Index> find_singular_pivot(const Eigen::PartialPivLU<Mat>& lu) {
  const auto diag = lu.matrixLU().diagonal().cwiseAbs();
  const double scale = diag.maxCoeff();
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (!std::isfinite(diag[i]) || diag[i] <= 1e-13 * scale || scale == 0.0) return i;
  }
  return std::nullopt;
}

}  // namespace

Mat fd_jacobian(const ResidualFn& residual, const Vec& x, double rel_step) {
  const Vec r0 = residual(x);
  Mat jac(r0.size(), x.size());
  Vec xp = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double step = rel_step * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + step;
    jac.col(j) = (residual(xp) - r0) / step;
    xp[j] = x[j];
  }
  return jac;
}

NewtonResult solve_newton(const ResidualFn& residual, const JacobianFn& jacobian, Vec x0,
                          const NewtonOptions& options) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("Newton tolerance must be positive");
  if (!(options.damping > 0.0 && options.damping <= 1.0)) {
    throw std::invalid_argument("Newton damping must lie in (0,1]");
  }
  NewtonResult result;
  result.x = std::move(x0);
  Vec r = residual(result.x);
  result.residual_norm = sup_norm(r);

  while (result.residual_norm > options.tol) {
    if (result.iterations >= options.max_iter) {
      result.message = "no convergence after " + std::to_string(options.max_iter) +
                       " iterations (residual " + format_double(result.residual_norm) + ")";
      return result;
    }
    ++result.iterations;

    const Mat jac = jacobian(result.x);
    if (jac.rows() != jac.cols() || jac.rows() != r.size()) {
      throw std::logic_error("Newton: Jacobian must be square and match the residual");
    }
    const Eigen::PartialPivLU<Mat> lu(jac);
    if (auto idx = find_singular_pivot(lu)) {
      result.singular_unknown = idx;
      result.message = "singular Jacobian at unknown " + std::to_string(*idx);
      return result;
    }
    const Vec delta = lu.solve(-r);

    double step = options.damping;
    bool accepted = false;
    while (step >= options.step_floor) {
      Vec trial = result.x + step * delta;
      Vec rt = residual(trial);
      const double norm = sup_norm(rt);
      if (std::isfinite(norm) && norm < result.residual_norm) {
        result.x = std::move(trial);
        r = std::move(rt);
        result.residual_norm = norm;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      result.message = "line search stalled at residual " + format_double(result.residual_norm);
      return result;
    }
  }
  result.converged = true;
  result.message = "converged";
  return result;
}

}  // namespace fracnoether
