#include "fracnoether/variational.hpp"

#include <cmath>
#include <limits>

namespace fracnoether {

namespace {

Vec central_gradient(const std::function<double(const Vec&)>& fn, const Vec& x) {
  Vec g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) g[j] = central_difference(fn, x, j);
  return g;
}

void require_dim(const CVLagrangian& L, const GridFn& q) {
  if (static_cast<std::size_t>(L.n) != q.dim()) {
    throw std::invalid_argument("Lagrangian dimension does not match the state");
  }
}

}  // namespace

PointState Trajectory::at(std::size_t k) const {
  PointState s;
  s.t = q.grid().node(k);
  s.q = q.row(k);
  s.d = d.row(k);
  if (u) s.u = u->row(k);
  if (p) s.p = p->row(k);
  return s;
}

Trajectory make_trajectory(const GridFn& q, FracOrder alpha) {
  return Trajectory{q, left_rl_deriv(q, alpha), std::nullopt, std::nullopt};
}

std::vector<ScalarPair> evaluate_pairs(const FactoredQuantity& c, const Trajectory& traj) {
  const Grid& grid = traj.q.grid();
  std::vector<ScalarPair> out;
  out.reserve(c.pairs.size());
  for (std::size_t i = 0; i < c.pairs.size(); ++i) out.push_back({GridFn(grid, 1), GridFn(grid, 1)});
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const PointState s = traj.at(k);
    for (std::size_t i = 0; i < c.pairs.size(); ++i) {
      out[i].f(k, 0) = c.pairs[i].first(s);
      out[i].g(k, 0) = c.pairs[i].second(s);
    }
  }
  return out;
}

GridFn charge_value(const FactoredQuantity& c, const Trajectory& traj) {
  GridFn out(traj.q.grid(), 1);
  for (const auto& pair : evaluate_pairs(c, traj)) {
    for (std::size_t k = 0; k < out.size(); ++k) out(k, 0) += pair.f(k, 0) * pair.g(k, 0);
  }
  return out;
}

Vec lagrangian_dq(const CVLagrangian& L, double t, const Vec& q, const Vec& d) {
  if (L.dq) return L.dq(t, q, d);
  return central_gradient([&](const Vec& x) { return L.value(t, x, d); }, q);
}

Vec lagrangian_dd(const CVLagrangian& L, double t, const Vec& q, const Vec& d) {
  if (L.dd) return L.dd(t, q, d);
  return central_gradient([&](const Vec& x) { return L.value(t, q, x); }, d);
}

std::vector<PartialCheck> check_partials(const CVLagrangian& L,
                                         const std::vector<PointState>& points) {
  PartialCheck cq{"dL/dq"};
  PartialCheck cd{"dL/dd"};
  for (const auto& s : points) {
    if (L.dq) {
      const Vec a = L.dq(s.t, s.q, s.d);
      for (Eigen::Index j = 0; j < s.q.size(); ++j) {
        cq.add(a[j], central_difference([&](const Vec& x) { return L.value(s.t, x, s.d); }, s.q, j));
      }
    }
    if (L.dd) {
      const Vec a = L.dd(s.t, s.q, s.d);
      for (Eigen::Index j = 0; j < s.d.size(); ++j) {
        cd.add(a[j], central_difference([&](const Vec& x) { return L.value(s.t, s.q, x); }, s.d, j));
      }
    }
  }
  return {cq, cd};
}

GridFn el_residual(const CVLagrangian& L, const GridFn& q, FracOrder alpha) {
  require_dim(L, q);
  const GridFn d = left_rl_deriv(q, alpha);
  const Grid& grid = q.grid();
  GridFn dq(grid, q.dim());
  GridFn dd(grid, q.dim());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid.node(k);
    const Vec qk = q.row(k);
    const Vec dk = d.row(k);
    dq.set_row(k, lagrangian_dq(L, t, qk, dk));
    dd.set_row(k, lagrangian_dd(L, t, qk, dk));
  }
  return dq + right_rl_deriv(dd, alpha);
}

ConservationReport conservation_on(const FactoredQuantity& c, const Trajectory& traj,
                                   FracOrder alpha, double tol) {
  if (c.pairs.empty()) throw std::invalid_argument("conservation law needs at least one pair");
  if (!(tol > 0.0)) throw std::invalid_argument("conservation tolerance must be positive");
  const auto pairs = evaluate_pairs(c, traj);
  GridFn residual = d_operator(pairs, alpha);
  const double m = window_sup(residual, interior_window(traj.q.grid()));
  return ConservationReport{m, tol, m <= tol, std::move(residual)};
}

ConservationReport is_conservation_law(const FactoredQuantity& c, const GridFn& q,
                                       FracOrder alpha, double tol) {
  return conservation_on(c, make_trajectory(q, alpha), alpha, tol);
}

FactoredQuantity noether_charge_cv(const CVLagrangian& L, const CVSymmetry& s, FracOrder alpha) {
  FactoredQuantity c;
  const double a = alpha.value();
  c.pairs.push_back({
      [L, a](const PointState& x) {
        return L.value(x.t, x.q, x.d) - a * lagrangian_dd(L, x.t, x.q, x.d).dot(x.d);
      },
      [s](const PointState& x) { return s.tau(x.t, x.q); },
  });
  for (int j = 0; j < L.n; ++j) {
    c.pairs.push_back({
        [L, j](const PointState& x) { return lagrangian_dd(L, x.t, x.q, x.d)[j]; },
        [s, j](const PointState& x) { return s.xi(x.t, x.q)[j]; },
    });
  }
  return c;
}

double require_constant_tau(const std::function<double(double, const Vec&)>& tau,
                            const GridFn& q) {
  const Grid& grid = q.grid();
  const double t0 = tau(grid.node(0), q.row(0));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec qk = q.row(k);
    const Vec shifted = qk.array() + 1.0;
    if (tau(grid.node(k), qk) != t0 || tau(grid.node(k), shifted) != t0) {
      throw UnsupportedTransformation(
          "invariance check supports only constant tau (time translations)");
    }
  }
  return t0;
}

InvarianceReport classify_invariance(std::vector<double> epsilons, std::vector<double> residuals,
                                     double scale) {
  InvarianceReport r;
  r.epsilons = std::move(epsilons);
  r.residuals = std::move(residuals);
  const double floor = 1e-13 * std::max(1.0, scale);
  std::vector<double> fe;
  std::vector<double> fr;
  bool all_floor = true;
  for (std::size_t i = 0; i < r.epsilons.size(); ++i) {
    if (r.epsilons[i] == 0.0) continue;
    if (r.residuals[i] > floor) all_floor = false;
    fe.push_back(std::abs(r.epsilons[i]));
    fr.push_back(r.residuals[i]);
  }
  r.exact = all_floor;
  r.slope = all_floor ? std::numeric_limits<double>::quiet_NaN() : fit_loglog_slope(fe, fr);
  r.invariant = r.exact || (std::isfinite(r.slope) && r.slope >= kInvariantSlope);
  return r;
}

InvarianceReport invariance_check_cv(const CVLagrangian& L, const CVSymmetry& s,
                                     const GridFn& q, FracOrder alpha,
                                     const std::vector<double>& epsilons) {
  require_dim(L, q);
  const double tau = require_constant_tau(s.tau, q);
  const Grid& grid = q.grid();
  const GridFn d = left_rl_deriv(q, alpha);

  GridFn base(grid, 1);
  double scale = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    base(k, 0) = L.value(grid.node(k), q.row(k), d.row(k));
    scale += std::abs(base(k, 0)) * grid.h();
  }

  std::vector<double> residuals;
  for (double eps : epsilons) {
    // q-bar sampled at t-bar_k = t_k + eps tau keeps the spacing h, so its
    // left derivative based at a-bar uses the same stencil.
    GridFn qbar = q;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      qbar.set_row(k, q.row(k) + eps * s.xi(grid.node(k), q.row(k)));
    }
    const GridFn dbar = left_rl_deriv(qbar, alpha);
    GridFn diff(grid, 1);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double tbar = grid.node(k) + eps * tau;
      diff(k, 0) = L.value(tbar, qbar.row(k), dbar.row(k)) - base(k, 0);
    }
    residuals.push_back(max_subinterval_integral(diff));
  }
  return classify_invariance(epsilons, std::move(residuals), scale);
}

ELSolution solve_el(const CVLagrangian& L, const Vec& q_a, const Vec& q_b, const Grid& grid,
                    FracOrder alpha, const NewtonOptions& options) {
  const auto n = static_cast<std::size_t>(L.n);
  if (static_cast<std::size_t>(q_a.size()) != n || static_cast<std::size_t>(q_b.size()) != n) {
    throw std::invalid_argument("boundary data dimension does not match the Lagrangian");
  }
  const std::size_t last = grid.size() - 1;
  const std::size_t inner = last - 1;

  auto assemble = [&](const Vec& x) {
    GridFn q(grid, n);
    q.set_row(0, q_a);
    q.set_row(last, q_b);
    for (std::size_t k = 1; k < last; ++k) {
      q.set_row(k, x.segment(static_cast<Eigen::Index>((k - 1) * n), static_cast<Eigen::Index>(n)));
    }
    return q;
  };
  const ResidualFn residual = [&](const Vec& x) {
    const GridFn r = el_residual(L, assemble(x), alpha);
    Vec out(static_cast<Eigen::Index>(inner * n));
    for (std::size_t k = 1; k < last; ++k) {
      out.segment(static_cast<Eigen::Index>((k - 1) * n), static_cast<Eigen::Index>(n)) = r.row(k);
    }
    return out;
  };
  const JacobianFn jacobian = [&](const Vec& x) { return fd_jacobian(residual, x); };

  // Straight line between the boundary values.
  Vec x0(static_cast<Eigen::Index>(inner * n));
  for (std::size_t k = 1; k < last; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(last);
    x0.segment(static_cast<Eigen::Index>((k - 1) * n), static_cast<Eigen::Index>(n)) =
        (1.0 - s) * q_a + s * q_b;
  }
  NewtonResult nr = solve_newton(residual, jacobian, x0, options);
  GridFn q = assemble(nr.x);
  return ELSolution{std::move(q), std::move(nr)};
}

}  // namespace fracnoether
