#include "fracnoether/optimal_control.hpp"

#include <cmath>
#include <stdexcept>

namespace fracnoether {

namespace {

void require_point(const OCProblem& P, const Vec& q, const Vec& u, const Vec& p) {
  if (q.size() != P.n || u.size() != P.m || p.size() != P.n) {
    throw std::invalid_argument("Hamiltonian: dimension mismatch");
  }
}

void require_same_grid3(const GridFn& q, const GridFn& u, const GridFn& p) {
  require_same_grid(q, u, "pontryagin_residual");
  require_same_grid(q, p, "pontryagin_residual");
}

// Unknown layout of the discrete Pontryagin system.
struct Layout {
  std::size_t n;
  std::size_t m;
  std::size_t last;  // N
  bool fixed_end;

  std::size_t q_nodes() const { return fixed_end ? last - 1 : last; }
  std::size_t u_nodes() const { return last + 1; }
  std::size_t p_nodes() const { return fixed_end ? last + 1 : last; }
  std::size_t u_offset() const { return q_nodes() * n; }
  std::size_t p_offset() const { return u_offset() + u_nodes() * m; }
  std::size_t size() const { return p_offset() + p_nodes() * n; }

  bool q_unknown(std::size_t k) const { return k >= 1 && k <= q_nodes(); }
  bool p_unknown(std::size_t k) const { return k < p_nodes(); }
  std::size_t q_index(std::size_t k, std::size_t i) const { return (k - 1) * n + i; }
  std::size_t u_index(std::size_t k, std::size_t i) const { return u_offset() + k * m + i; }
  std::size_t p_index(std::size_t k, std::size_t i) const { return p_offset() + k * n + i; }

  std::string describe(std::size_t idx) const {
    if (idx < u_offset()) return "q at node " + std::to_string(idx / n + 1);
    if (idx < p_offset()) return "u at node " + std::to_string((idx - u_offset()) / m);
    return "p at node " + std::to_string((idx - p_offset()) / n);
  }
};

// Partials fall back to central differences when the problem omits them.
Vec l_dq(const OCProblem& P, double t, const Vec& q, const Vec& u) {
  if (P.dL_dq) return P.dL_dq(t, q, u);
  Vec g(P.n);
  for (Eigen::Index j = 0; j < P.n; ++j) {
    g[j] = central_difference([&](const Vec& x) { return P.L(t, x, u); }, q, j);
  }
  return g;
}

Vec l_du(const OCProblem& P, double t, const Vec& q, const Vec& u) {
  if (P.dL_du) return P.dL_du(t, q, u);
  Vec g(P.m);
  for (Eigen::Index j = 0; j < P.m; ++j) {
    g[j] = central_difference([&](const Vec& x) { return P.L(t, q, x); }, u, j);
  }
  return g;
}

Mat phi_dq(const OCProblem& P, double t, const Vec& q, const Vec& u) {
  if (P.dphi_dq) return P.dphi_dq(t, q, u);
  Mat J(P.n, P.n);
  for (Eigen::Index i = 0; i < P.n; ++i)
    for (Eigen::Index j = 0; j < P.n; ++j)
      J(i, j) = central_difference([&](const Vec& x) { return P.phi(t, x, u)[i]; }, q, j);
  return J;
}

Mat phi_du(const OCProblem& P, double t, const Vec& q, const Vec& u) {
  if (P.dphi_du) return P.dphi_du(t, q, u);
  Mat J(P.n, P.m);
  for (Eigen::Index i = 0; i < P.n; ++i)
    for (Eigen::Index j = 0; j < P.m; ++j)
      J(i, j) = central_difference([&](const Vec& x) { return P.phi(t, q, x)[i]; }, u, j);
  return J;
}

}  // namespace

double hamiltonian(const OCProblem& P, double t, const Vec& q, const Vec& u, const Vec& p) {
  require_point(P, q, u, p);
  return P.L(t, q, u) + p.dot(P.phi(t, q, u));
}

Vec hamiltonian_dq(const OCProblem& P, double t, const Vec& q, const Vec& u, const Vec& p) {
  require_point(P, q, u, p);
  return l_dq(P, t, q, u) + phi_dq(P, t, q, u).transpose() * p;
}

Vec hamiltonian_du(const OCProblem& P, double t, const Vec& q, const Vec& u, const Vec& p) {
  require_point(P, q, u, p);
  return l_du(P, t, q, u) + phi_du(P, t, q, u).transpose() * p;
}

Vec hamiltonian_dp(const OCProblem& P, double t, const Vec& q, const Vec& u, const Vec& p) {
  require_point(P, q, u, p);
  return P.phi(t, q, u);
}

std::vector<PartialCheck> check_partials(const OCProblem& P,
                                         const std::vector<PointState>& points) {
  PartialCheck lq{"dL/dq"}, lu{"dL/du"}, fq{"dphi/dq"}, fu{"dphi/du"};
  for (const auto& s : points) {
    const Vec aq = l_dq(P, s.t, s.q, s.u);
    const Vec au = l_du(P, s.t, s.q, s.u);
    const Mat fq_a = phi_dq(P, s.t, s.q, s.u);
    const Mat fu_a = phi_du(P, s.t, s.q, s.u);
    for (Eigen::Index j = 0; j < P.n; ++j) {
      lq.add(aq[j], central_difference([&](const Vec& x) { return P.L(s.t, x, s.u); }, s.q, j));
      for (Eigen::Index i = 0; i < P.n; ++i) {
        fq.add(fq_a(i, j),
               central_difference([&](const Vec& x) { return P.phi(s.t, x, s.u)[i]; }, s.q, j));
      }
    }
    for (Eigen::Index j = 0; j < P.m; ++j) {
      lu.add(au[j], central_difference([&](const Vec& x) { return P.L(s.t, s.q, x); }, s.u, j));
      for (Eigen::Index i = 0; i < P.n; ++i) {
        fu.add(fu_a(i, j),
               central_difference([&](const Vec& x) { return P.phi(s.t, s.q, x)[i]; }, s.u, j));
      }
    }
  }
  return {lq, lu, fq, fu};
}

std::vector<PartialCheck> check_hamiltonian_partials(const OCProblem& P,
                                                     const std::vector<PointState>& points) {
  PartialCheck hq{"dH/dq"}, hu{"dH/du"}, hp{"dH/dp"};
  for (const auto& s : points) {
    const Vec aq = hamiltonian_dq(P, s.t, s.q, s.u, s.p);
    const Vec au = hamiltonian_du(P, s.t, s.q, s.u, s.p);
    const Vec ap = hamiltonian_dp(P, s.t, s.q, s.u, s.p);
    for (Eigen::Index j = 0; j < P.n; ++j) {
      hq.add(aq[j], central_difference(
                        [&](const Vec& x) { return hamiltonian(P, s.t, x, s.u, s.p); }, s.q, j));
      hp.add(ap[j], central_difference(
                        [&](const Vec& x) { return hamiltonian(P, s.t, s.q, s.u, x); }, s.p, j));
    }
    for (Eigen::Index j = 0; j < P.m; ++j) {
      hu.add(au[j], central_difference(
                        [&](const Vec& x) { return hamiltonian(P, s.t, s.q, x, s.p); }, s.u, j));
    }
  }
  return {hq, hu, hp};
}

OCProblem cv_to_oc(const CVLagrangian& L, Vec q_a, std::optional<Vec> q_b) {
  OCProblem P;
  P.n = L.n;
  P.m = L.n;
  P.L = [L](double t, const Vec& q, const Vec& u) { return L.value(t, q, u); };
  P.phi = [](double, const Vec&, const Vec& u) { return u; };
  P.dL_dq = [L](double t, const Vec& q, const Vec& u) { return lagrangian_dq(L, t, q, u); };
  P.dL_du = [L](double t, const Vec& q, const Vec& u) { return lagrangian_dd(L, t, q, u); };
  P.dphi_dq = [n = L.n](double, const Vec&, const Vec&) { return Mat::Zero(n, n).eval(); };
  P.dphi_du = [n = L.n](double, const Vec&, const Vec&) { return Mat::Identity(n, n).eval(); };
  P.q_a = std::move(q_a);
  P.q_b = std::move(q_b);
  return P;
}

PontryaginResiduals pontryagin_residual(const OCProblem& P, const GridFn& q, const GridFn& u,
                                        const GridFn& p, FracOrder alpha) {
  require_same_grid3(q, u, p);
  const auto n = static_cast<std::size_t>(P.n);
  const auto m = static_cast<std::size_t>(P.m);
  if (q.dim() != n || p.dim() != n || u.dim() != m) {
    throw std::invalid_argument("pontryagin_residual: dimension mismatch");
  }
  const Grid& grid = q.grid();
  PontryaginResiduals r{left_rl_deriv(q, alpha), right_rl_deriv(p, alpha), GridFn(grid, m)};
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid.node(k);
    const Vec qk = q.row(k);
    const Vec uk = u.row(k);
    const Vec pk = p.row(k);
    r.dyn.set_row(k, r.dyn.row(k) - hamiltonian_dp(P, t, qk, uk, pk));
    r.adj.set_row(k, r.adj.row(k) - hamiltonian_dq(P, t, qk, uk, pk));
    r.stat.set_row(k, hamiltonian_du(P, t, qk, uk, pk));
  }
  return r;
}

Extremal solve_extremal(const OCProblem& P, FracOrder alpha, const Grid& grid,
                        const SolveOptions& options) {
  if (P.q_a.size() != P.n || (P.q_b && P.q_b->size() != P.n)) {
    throw std::invalid_argument("solve_extremal: boundary data dimension mismatch");
  }
  const Layout lay{static_cast<std::size_t>(P.n), static_cast<std::size_t>(P.m),
                   grid.size() - 1, P.q_b.has_value()};
  const std::size_t n = lay.n;
  const std::size_t m = lay.m;
  const std::size_t last = lay.last;
  const auto idx = [](std::size_t i) { return static_cast<Eigen::Index>(i); };

  auto unpack = [&](const Vec& x) {
    std::tuple<GridFn, GridFn, GridFn> out{GridFn(grid, n), GridFn(grid, m), GridFn(grid, n)};
    auto& [q, u, p] = out;
    q.set_row(0, P.q_a);
    if (P.q_b) q.set_row(last, *P.q_b);
    for (std::size_t k = 0; k <= last; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        if (lay.q_unknown(k)) q(k, i) = x[idx(lay.q_index(k, i))];
        p(k, i) = lay.p_unknown(k) ? x[idx(lay.p_index(k, i))] : 0.0;
      }
      for (std::size_t i = 0; i < m; ++i) u(k, i) = x[idx(lay.u_index(k, i))];
    }
    return out;
  };

  // Equations: dynamics at nodes 1..N, adjoint at 0..N-1, stationarity at 0..N.
  const std::size_t dyn_rows = last * n;
  const std::size_t adj_rows = last * n;
  const ResidualFn residual = [&](const Vec& x) {
    const auto [q, u, p] = unpack(x);
    const auto r = pontryagin_residual(P, q, u, p, alpha);
    Vec out(idx(lay.size()));
    std::size_t row = 0;
    for (std::size_t k = 1; k <= last; ++k)
      for (std::size_t i = 0; i < n; ++i) out[idx(row++)] = r.dyn(k, i);
    for (std::size_t k = 0; k < last; ++k)
      for (std::size_t i = 0; i < n; ++i) out[idx(row++)] = r.adj(k, i);
    for (std::size_t k = 0; k <= last; ++k)
      for (std::size_t i = 0; i < m; ++i) out[idx(row++)] = r.stat(k, i);
    return out;
  };

  // The convolution parts are linear with known stencil coefficients; only
  // the nodewise maps phi, dH/dq, dH/du are differenced.
  const auto weights = gl_weights(alpha.value(), static_cast<long>(last));
  const double scale = alpha.is_classical() ? 1.0 / grid.h() : std::pow(grid.h(), -alpha.value());
  const JacobianFn jacobian = [&](const Vec& x) {
    const auto [q, u, p] = unpack(x);
    Mat J = Mat::Zero(idx(lay.size()), idx(lay.size()));
    for (std::size_t k = 1; k <= last; ++k) {
      for (std::size_t j = 0; j <= k; ++j) {
        const std::size_t node = k - j;
        if (!lay.q_unknown(node) || weights.w[j] == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) {
          J(idx((k - 1) * n + i), idx(lay.q_index(node, i))) += scale * weights.w[j];
        }
      }
    }
    for (std::size_t k = 0; k < last; ++k) {
      for (std::size_t j = 0; k + j <= last; ++j) {
        const std::size_t node = k + j;
        if (!lay.p_unknown(node) || weights.w[j] == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) {
          J(idx(dyn_rows + k * n + i), idx(lay.p_index(node, i))) += scale * weights.w[j];
        }
      }
    }

    const std::size_t local = 2 * n + m;
    auto local_map = [&](double t, const Vec& z) {
      const Vec qk = z.head(idx(n));
      const Vec uk = z.segment(idx(n), idx(m));
      const Vec pk = z.tail(idx(n));
      Vec out(idx(local));
      out.head(idx(n)) = hamiltonian_dp(P, t, qk, uk, pk);
      out.segment(idx(n), idx(n)) = hamiltonian_dq(P, t, qk, uk, pk);
      out.tail(idx(m)) = hamiltonian_du(P, t, qk, uk, pk);
      return out;
    };
    for (std::size_t k = 0; k <= last; ++k) {
      const double t = grid.node(k);
      Vec z(idx(local));
      z << q.row(k), u.row(k), p.row(k);
      const Vec f0 = local_map(t, z);
      for (std::size_t v = 0; v < local; ++v) {
        // Column of the unknown that local variable v refers to, if any.
        long col = -1;
        if (v < n) {
          if (lay.q_unknown(k)) col = static_cast<long>(lay.q_index(k, v));
        } else if (v < n + m) {
          col = static_cast<long>(lay.u_index(k, v - n));
        } else if (lay.p_unknown(k)) {
          col = static_cast<long>(lay.p_index(k, v - n - m));
        }
        if (col < 0) continue;
        Vec zp = z;
        const double step = 1e-7 * std::max(1.0, std::abs(z[idx(v)]));
        zp[idx(v)] += step;
        const Vec df = (local_map(t, zp) - f0) / step;
        for (std::size_t i = 0; i < n; ++i) {
          if (k >= 1) J(idx((k - 1) * n + i), col) -= df[idx(i)];
          if (k < last) J(idx(dyn_rows + k * n + i), col) -= df[idx(n + i)];
        }
        for (std::size_t i = 0; i < m; ++i) {
          J(idx(dyn_rows + adj_rows + k * m + i), col) += df[idx(2 * n + i)];
        }
      }
    }
    return J;
  };

  Vec x0 = Vec::Zero(idx(lay.size()));
  for (std::size_t k = 0; k <= last; ++k) {
    Vec q0 = P.q_a;
    Vec u0 = Vec::Zero(idx(m));
    Vec p0 = Vec::Zero(idx(n));
    if (P.warm_start) std::tie(q0, u0, p0) = P.warm_start(grid.node(k));
    for (std::size_t i = 0; i < n; ++i) {
      if (lay.q_unknown(k)) x0[idx(lay.q_index(k, i))] = q0[idx(i)];
      if (lay.p_unknown(k)) x0[idx(lay.p_index(k, i))] = p0[idx(i)];
    }
    for (std::size_t i = 0; i < m; ++i) x0[idx(lay.u_index(k, i))] = u0[idx(i)];
  }

  NewtonOptions nopt;
  nopt.tol = options.tol;
  nopt.max_iter = options.max_iter;
  nopt.damping = options.damping;
  const NewtonResult nr = solve_newton(residual, jacobian, x0, nopt);

  auto [q, u, p] = unpack(nr.x);
  const auto r = pontryagin_residual(P, q, u, p, alpha);
  const auto w = interior_window(grid);
  Extremal e{std::move(q),        std::move(u),         std::move(p),
             window_sup(r.dyn, w), window_sup(r.adj, w), window_sup(r.stat, w),
             nr.residual_norm,      nr.iterations,        nr.converged,
             nr.message};
  if (nr.singular_unknown) {
    e.diagnostic = "singular Jacobian: " +
                   lay.describe(static_cast<std::size_t>(*nr.singular_unknown));
  }
  return e;
}

OCSymmetry time_translation(int n, int m) {
  return OCSymmetry{
      [](double, const Vec&, const Vec&, const Vec&) { return 1.0; },
      [n](double, const Vec&, const Vec&, const Vec&) { return Vec::Zero(n).eval(); },
      [m](double, const Vec&, const Vec&, const Vec&) { return Vec::Zero(m).eval(); },
      [n](double, const Vec&, const Vec&, const Vec&) { return Vec::Zero(n).eval(); },
  };
}

Trajectory trajectory_of(const Extremal& e, FracOrder alpha) {
  return Trajectory{e.q, left_rl_deriv(e.q, alpha), e.u, e.p};
}

FactoredQuantity noether_charge_oc(const OCProblem& P, const OCSymmetry& s, FracOrder alpha) {
  FactoredQuantity c;
  const double a = alpha.value();
  c.pairs.push_back({
      [P, a](const PointState& x) {
        return hamiltonian(P, x.t, x.q, x.u, x.p) - (1.0 - a) * x.p.dot(x.d);
      },
      [s](const PointState& x) { return s.tau(x.t, x.q, x.u, x.p); },
  });
  for (int j = 0; j < P.n; ++j) {
    c.pairs.push_back({
        [j](const PointState& x) { return -x.p[j]; },
        [s, j](const PointState& x) { return s.xi(x.t, x.q, x.u, x.p)[j]; },
    });
  }
  return c;
}

OCConservationReport conservation_check_oc(const FactoredQuantity& c, const Extremal& e,
                                           FracOrder alpha, double tol) {
  if (!e.converged) {
    throw std::invalid_argument("conservation check requires a converged extremal");
  }
  const Trajectory traj = trajectory_of(e, alpha);
  auto base = conservation_on(c, traj, alpha, tol);
  GridFn value = charge_value(c, traj);
  const double spread = window_spread(value, 0, interior_window(e.q.grid()));
  const bool pass = base.pass && (!alpha.is_classical() || spread <= tol);
  return OCConservationReport{base.max_residual, spread, tol, pass, std::move(base.residual),
                              std::move(value)};
}

InvarianceReport invariance_check_oc(const OCProblem& P, const OCSymmetry& s, const Extremal& e,
                                     FracOrder alpha, const std::vector<double>& epsilons) {
  const Grid& grid = e.q.grid();
  // tau may depend on (t, q, u, p); constancy is checked along q with u, p
  // frozen at the extremal.
  const double tau = require_constant_tau(
      [&](double t, const Vec& q) {
        const std::size_t k = static_cast<std::size_t>(std::lround((t - grid.a()) / grid.h()));
        return s.tau(t, q, e.u.row(k), e.p.row(k));
      },
      e.q);

  const GridFn d = left_rl_deriv(e.q, alpha);
  GridFn base(grid, 1);
  double scale = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec qk = e.q.row(k);
    const Vec pk = e.p.row(k);
    base(k, 0) = hamiltonian(P, grid.node(k), qk, e.u.row(k), pk) - pk.dot(d.row(k));
    scale += std::abs(base(k, 0)) * grid.h();
  }

  std::vector<double> residuals;
  for (double eps : epsilons) {
    GridFn qbar = e.q;
    GridFn ubar = e.u;
    GridFn pbar = e.p;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double t = grid.node(k);
      const Vec qk = e.q.row(k);
      const Vec uk = e.u.row(k);
      const Vec pk = e.p.row(k);
      qbar.set_row(k, qk + eps * s.xi(t, qk, uk, pk));
      ubar.set_row(k, uk + eps * s.sigma(t, qk, uk, pk));
      pbar.set_row(k, pk + eps * s.zeta(t, qk, uk, pk));
    }
    const GridFn dbar = left_rl_deriv(qbar, alpha);
    GridFn diff(grid, 1);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double tbar = grid.node(k) + eps * tau;
      const Vec pk = pbar.row(k);
      diff(k, 0) = hamiltonian(P, tbar, qbar.row(k), ubar.row(k), pk) - pk.dot(dbar.row(k)) -
                   base(k, 0);
    }
    residuals.push_back(max_subinterval_integral(diff));
  }
  return classify_invariance(epsilons, std::move(residuals), scale);
}

}  // namespace fracnoether
