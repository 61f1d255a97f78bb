#pragma once

// Fractional optimal control: minimise int L(t,q,u) dt subject to
// left_rl_deriv(q) = phi(t,q,u). Provides the Hamiltonian
// H = L + p . phi, the Pontryagin residuals, a fully coupled Newton solver
// for the discrete Pontryagin system, and the Noether charge
// [H - (1-alpha) p . D^alpha q] tau - p . xi with its conservation test.

#include "fracnoether/fit.hpp"
#include "fracnoether/fractional.hpp"
#include "fracnoether/grid.hpp"
#include "fracnoether/variational.hpp"

#include <functional>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace fracnoether {

using OCScalarFn = std::function<double(double, const Vec&, const Vec&)>;
using OCVectorFn = std::function<Vec(double, const Vec&, const Vec&)>;
using OCMatrixFn = std::function<Mat(double, const Vec&, const Vec&)>;

/// Control values live in an open set: there are no control bounds.
struct OCProblem {
  int n = 1;  // state dimension
  int m = 1;  // control dimension
  OCScalarFn L;
  OCVectorFn phi;
  // Partials are optional; missing ones fall back to central differences.
  OCVectorFn dL_dq;    // n
  OCVectorFn dL_du;    // m
  OCMatrixFn dphi_dq;  // n x n
  OCMatrixFn dphi_du;  // n x m
  Vec q_a;
  std::optional<Vec> q_b;  // fixed terminal state; free when empty
  // Optional initial iterate (q, u, p) at time t.
  std::function<std::tuple<Vec, Vec, Vec>(double)> warm_start;
};

double hamiltonian(const OCProblem& P, double t, const Vec& q, const Vec& u, const Vec& p);
Vec hamiltonian_dq(const OCProblem& P, double t, const Vec& q, const Vec& u, const Vec& p);
Vec hamiltonian_du(const OCProblem& P, double t, const Vec& q, const Vec& u, const Vec& p);
Vec hamiltonian_dp(const OCProblem& P, double t, const Vec& q, const Vec& u, const Vec& p);

/// Partials of L and phi against central differences.
std::vector<PartialCheck> check_partials(const OCProblem& P,
                                         const std::vector<PointState>& points);
/// Partials of H against central differences of hamiltonian().
std::vector<PartialCheck> check_hamiltonian_partials(const OCProblem& P,
                                                     const std::vector<PointState>& points);

/// phi = u reduction of a calculus-of-variations problem.
OCProblem cv_to_oc(const CVLagrangian& L, Vec q_a, std::optional<Vec> q_b);

struct PontryaginResiduals {
  GridFn dyn;   // left(q) - dH/dp
  GridFn adj;   // right(p) - dH/dq
  GridFn stat;  // dH/du
};

PontryaginResiduals pontryagin_residual(const OCProblem& P, const GridFn& q, const GridFn& u,
                                        const GridFn& p, FracOrder alpha);

struct SolveOptions {
  double tol = 1e-10;
  int max_iter = 30;
  double damping = 1.0;
};

struct Extremal {
  GridFn q;
  GridFn u;
  GridFn p;
  // Interior-window sup-norms of the Pontryagin residuals.
  double r_dyn = 0.0;
  double r_adj = 0.0;
  double r_stat = 0.0;
  double newton_residual = 0.0;  // over every equation of the discrete system
  int iterations = 0;
  bool converged = false;
  std::string diagnostic;
};

/// Fully coupled damped Newton on q_1..q_N, u_0..u_N, p_0..p_{N-1}. A free
/// terminal state imposes p_N = 0; a fixed one pins q_N = q_b and leaves
/// p_N unknown.
Extremal solve_extremal(const OCProblem& P, FracOrder alpha, const Grid& grid,
                        const SolveOptions& options);

using OCGeneratorScalar = std::function<double(double, const Vec&, const Vec&, const Vec&)>;
using OCGeneratorVector = std::function<Vec(double, const Vec&, const Vec&, const Vec&)>;

struct OCSymmetry {
  OCGeneratorScalar tau;
  OCGeneratorVector xi;     // n
  OCGeneratorVector sigma;  // m
  OCGeneratorVector zeta;   // n
};

/// Time translation tau = 1 with every other generator zero.
OCSymmetry time_translation(int n, int m);

Trajectory trajectory_of(const Extremal& e, FracOrder alpha);

/// Pairs (H - (1-alpha) p . d, tau) and (-p_j, xi_j).
FactoredQuantity noether_charge_oc(const OCProblem& P, const OCSymmetry& s, FracOrder alpha);

struct OCConservationReport {
  double charge_residual = 0.0;  // interior sup of d_operator
  double charge_spread = 0.0;    // interior max - min of the charge value
  double tol = 0.0;
  bool pass = false;
  GridFn residual;
  GridFn value;
};

/// Rejects unconverged extremals. For alpha == 1 the spread must also sit
/// below tol.
OCConservationReport conservation_check_oc(const FactoredQuantity& c, const Extremal& e,
                                           FracOrder alpha, double tol);

/// Compares the augmented integrand H - p . D^alpha q before and after the
/// transformation, over every on-grid subinterval.
InvarianceReport invariance_check_oc(const OCProblem& P, const OCSymmetry& s, const Extremal& e,
                                     FracOrder alpha, const std::vector<double>& epsilons);

}  // namespace fracnoether
