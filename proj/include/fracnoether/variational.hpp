#pragma once

// Fractional calculus of variations: Euler-Lagrange residuals, the
// sum-of-products conservation-law test built on d_operator, and the
// Noether charge of an invariant Lagrangian.

#include "fracnoether/fit.hpp"
#include "fracnoether/fractional.hpp"
#include "fracnoether/grid.hpp"
#include "fracnoether/newton.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace fracnoether {

/// Pointwise state handed to factor functions. u and p are empty for
/// calculus-of-variations problems; d is the left derivative of q.
struct PointState {
  double t = 0.0;
  Vec q;
  Vec d;
  Vec u;
  Vec p;
};

using Factor = std::function<double(const PointState&)>;

/// One product C1 * C2. `first` is the right-derivative operand in
/// d_operator, `second` the left-derivative operand.
struct FactorPair {
  Factor first;
  Factor second;
};

struct FactoredQuantity {
  std::vector<FactorPair> pairs;
};

/// Grid samples a FactoredQuantity is evaluated on.
struct Trajectory {
  GridFn q;
  GridFn d;
  std::optional<GridFn> u;
  std::optional<GridFn> p;

  PointState at(std::size_t k) const;
};

/// Trajectory with d := left_rl_deriv(q).
Trajectory make_trajectory(const GridFn& q, FracOrder alpha);

/// Evaluates every factor at every node.
std::vector<ScalarPair> evaluate_pairs(const FactoredQuantity& c, const Trajectory& traj);

/// Pointwise value sum_i C1_i * C2_i.
GridFn charge_value(const FactoredQuantity& c, const Trajectory& traj);

using ScalarFn3 = std::function<double(double, const Vec&, const Vec&)>;
using VectorFn3 = std::function<Vec(double, const Vec&, const Vec&)>;

/// L(t, q, d) with optional analytic partials; missing partials fall back
/// to central differences.
struct CVLagrangian {
  int n = 1;
  ScalarFn3 value;
  VectorFn3 dq;  // partial wrt q
  VectorFn3 dd;  // partial wrt d
};

Vec lagrangian_dq(const CVLagrangian& L, double t, const Vec& q, const Vec& d);
Vec lagrangian_dd(const CVLagrangian& L, double t, const Vec& q, const Vec& d);

/// Checks analytic partials against central differences at the given points.
std::vector<PartialCheck> check_partials(const CVLagrangian& L,
                                         const std::vector<PointState>& points);

/// Generator of t -> t + eps tau(t,q), q -> q + eps xi(t,q).
struct CVSymmetry {
  std::function<double(double, const Vec&)> tau;
  std::function<Vec(double, const Vec&)> xi;
};

/// dL/dq + right_rl_deriv(dL/dd) with d = left_rl_deriv(q).
GridFn el_residual(const CVLagrangian& L, const GridFn& q, FracOrder alpha);

struct ConservationReport {
  double max_residual = 0.0;
  double tol = 0.0;
  bool pass = false;
  GridFn residual;  // d_operator over all nodes
};

/// Applies d_operator to the quantity along q and measures it on the
/// interior window.
ConservationReport is_conservation_law(const FactoredQuantity& c, const GridFn& q,
                                       FracOrder alpha, double tol);

/// Same test on an arbitrary trajectory (used by the optimal-control side).
ConservationReport conservation_on(const FactoredQuantity& c, const Trajectory& traj,
                                   FracOrder alpha, double tol);

/// [L - alpha dL/dd . d] tau + dL/dd . xi as pairs
/// (L - alpha dL/dd . d, tau), ((dL/dd)_j, xi_j).
FactoredQuantity noether_charge_cv(const CVLagrangian& L, const CVSymmetry& s, FracOrder alpha);

class UnsupportedTransformation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct InvarianceReport {
  std::vector<double> epsilons;
  std::vector<double> residuals;
  double slope = 0.0;  // NaN when every residual is at roundoff
  bool exact = false;
  bool invariant = false;
};

/// Slope at or above this marks second-order (invariant) behaviour.
inline constexpr double kInvariantSlope = 1.8;

/// Compares the action over every on-grid subinterval before and after the
/// transformation. Only constant tau (time translations) is supported.
InvarianceReport invariance_check_cv(const CVLagrangian& L, const CVSymmetry& s,
                                     const GridFn& q, FracOrder alpha,
                                     const std::vector<double>& epsilons);

/// Shared classification of r(eps) into exact / slope / invariant.
InvarianceReport classify_invariance(std::vector<double> epsilons, std::vector<double> residuals,
                                     double scale);

/// Throws UnsupportedTransformation unless tau is constant along q and
/// nearby states; returns the constant.
double require_constant_tau(const std::function<double(double, const Vec&)>& tau,
                            const GridFn& q);

struct ELSolution {
  GridFn q;
  NewtonResult newton;
};

/// Solves the discrete fractional Euler-Lagrange equations at nodes
/// 1..N-1 with q(a) = q_a and q(b) = q_b fixed.
ELSolution solve_el(const CVLagrangian& L, const Vec& q_a, const Vec& q_b, const Grid& grid,
                    FracOrder alpha, const NewtonOptions& options);

}  // namespace fracnoether
