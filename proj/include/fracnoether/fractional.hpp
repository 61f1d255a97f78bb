#pragma once

// Grünwald-Letnikov discretizations of the left and right Riemann-Liouville
// operators on uniform grids, plus the analytic power-rule oracle.
//
// All operators act componentwise on GridFn and are first-order accurate
// away from the endpoint where the operator is based (t_0 for left, t_N for
// right). The endpoint sample itself is computed by the same convolution
// but should be treated as flagged: metrics skip it via interior_window().

#include "fracnoether/grid.hpp"

#include <span>
#include <vector>

namespace fracnoether {

struct GLWeights {
  double alpha;
  std::vector<double> w;  // w_0 .. w_K
};

/// w_0 = 1, w_k = w_{k-1} (k-1-alpha)/k. Negative alpha gives fractional
/// integral weights; alpha == 1 collapses to [1, -1, 0, ...].
GLWeights gl_weights(double alpha, long count);

/// h^{-order} sum_{j<=k} w_j f_{k-j} for any order in (-1, 1]; order 0 is
/// the identity and order 1 the exact backward difference.
GridFn left_gl(const GridFn& f, double order);

/// Mirror image of left_gl based at t_N.
GridFn right_gl(const GridFn& f, double order);

/// Left Riemann-Liouville derivative of order alpha based at t_0 = a.
GridFn left_rl_deriv(const GridFn& f, FracOrder alpha);

/// Right Riemann-Liouville derivative based at t_N = b. For alpha == 1 this
/// is -d/dt, realised as (f_k - f_{k+1})/h.
GridFn right_rl_deriv(const GridFn& f, FracOrder alpha);

/// Left fractional integral of order p in (0, 1).
GridFn frac_integral(const GridFn& f, double p);

/// Gamma function; poles return +-inf as std::tgamma does.
double gamma_fn(double x);

/// 1/Gamma(x), exactly 0 at the poles x = 0, -1, -2, ...
double reciprocal_gamma(double x);

/// Gamma(v+1)/Gamma(v-p+1) (t-a)^{v-p}: the order-p derivative of (t-a)^v.
/// Negative p gives the fractional integral of order -p.
double power_rule_analytic(double upsilon, double p, double a, double t);

struct ScalarPair {
  GridFn f;  // right-derivative operand
  GridFn g;  // left-derivative operand
};

/// sum_i [ -g_i * right(f_i) + f_i * left(g_i) ], pointwise.
GridFn d_operator(std::span<const ScalarPair> pairs, FracOrder alpha);

/// |Q(left(f) g) - Q(f right(g))| with trapezoidal Q.
double integration_by_parts_residual(const GridFn& f, const GridFn& g, FracOrder p);

/// The two quadratures compared by integration_by_parts_residual.
struct ByPartsSides {
  double left_side;   // Q(left(f) g)
  double right_side;  // Q(f right(g))
};
ByPartsSides integration_by_parts_sides(const GridFn& f, const GridFn& g, FracOrder p);

}  // namespace fracnoether
