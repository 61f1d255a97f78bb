#include "doctest.h"

#include "fracnoether/optimal_control.hpp"

#include <array>
#include <cmath>
#include <random>

using namespace fracnoether;

namespace {

Vec scalar(double v) { return Vec::Constant(1, v); }
Mat scalar_mat(double v) { return Mat::Constant(1, 1, v); }

// L = (q^2 + u^2)/2 with phi = decay_sign * q + u.
OCProblem lq(double qcoef, std::optional<Vec> q_b = std::nullopt) {
  OCProblem P;
  P.L = [](double, const Vec& q, const Vec& u) { return 0.5 * (q[0] * q[0] + u[0] * u[0]); };
  P.phi = [qcoef](double, const Vec& q, const Vec& u) { return scalar(qcoef * q[0] + u[0]); };
  P.dL_dq = [](double, const Vec& q, const Vec&) { return scalar(q[0]); };
  P.dL_du = [](double, const Vec&, const Vec& u) { return scalar(u[0]); };
  P.dphi_dq = [qcoef](double, const Vec&, const Vec&) { return scalar_mat(qcoef); };
  P.dphi_du = [](double, const Vec&, const Vec&) { return scalar_mat(1.0); };
  P.q_a = scalar(1.0);
  P.q_b = std::move(q_b);
  return P;
}

CVLagrangian kinetic() {
  CVLagrangian L;
  L.n = 1;
  L.value = [](double, const Vec&, const Vec& d) { return 0.5 * d[0] * d[0]; };
  L.dq = [](double, const Vec&, const Vec&) { return scalar(0.0); };
  L.dd = [](double, const Vec&, const Vec& d) { return scalar(d[0]); };
  return L;
}

CVLagrangian soft_spring() {
  CVLagrangian L;
  L.n = 1;
  L.value = [](double, const Vec& q, const Vec& d) { return 0.5 * d[0] * d[0] + 0.5 * q[0] * q[0]; };
  L.dq = [](double, const Vec& q, const Vec&) { return scalar(q[0]); };
  L.dd = [](double, const Vec&, const Vec& d) { return scalar(d[0]); };
  return L;
}

// Classical oracle for q' = -q - p, p' = -q + p, q(0) = 1, p(1) = 0: RK4
// shooting on the unknown p(0). The system is linear, so two basis runs
// determine it.
struct LQOracle {
  std::vector<double> t, q, p;
};

LQOracle lq_shooting(int steps) {
  const auto rhs = [](const std::array<double, 2>& x) {
    return std::array<double, 2>{-x[0] - x[1], -x[0] + x[1]};
  };
  const auto run = [&](double q0, double p0, LQOracle* out) {
    std::array<double, 2> x{q0, p0};
    const double h = 1.0 / steps;
    if (out) {
      out->t.push_back(0.0);
      out->q.push_back(x[0]);
      out->p.push_back(x[1]);
    }
    for (int i = 0; i < steps; ++i) {
      const auto k1 = rhs(x);
      const auto k2 = rhs({x[0] + 0.5 * h * k1[0], x[1] + 0.5 * h * k1[1]});
      const auto k3 = rhs({x[0] + 0.5 * h * k2[0], x[1] + 0.5 * h * k2[1]});
      const auto k4 = rhs({x[0] + h * k3[0], x[1] + h * k3[1]});
      for (int j = 0; j < 2; ++j) x[j] += h / 6.0 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
      if (out) {
        out->t.push_back((i + 1) * h);
        out->q.push_back(x[0]);
        out->p.push_back(x[1]);
      }
    }
    return x;
  };
  const double p1_from_q = run(1.0, 0.0, nullptr)[1];
  const double p1_from_p = run(0.0, 1.0, nullptr)[1];
  const double p0 = -p1_from_q / p1_from_p;
  LQOracle o;
  run(1.0, p0, &o);
  return o;
}

double value_at(const FactoredQuantity& c, const PointState& s) {
  double v = 0.0;
  for (const auto& pr : c.pairs) v += pr.first(s) * pr.second(s);
  return v;
}

OCSymmetry zero_symmetry() {
  const auto zero = [](double, const Vec& q, const Vec&, const Vec&) { return Vec::Zero(q.size()).eval(); };
  return {[](double, const Vec&, const Vec&, const Vec&) { return 0.0; }, zero, zero, zero};
}

}  // namespace

TEST_SUITE("hamiltonian") {
  TEST_CASE("L = u^2, phi = u") {
    OCProblem P;
    P.L = [](double, const Vec&, const Vec& u) { return u[0] * u[0]; };
    P.phi = [](double, const Vec&, const Vec& u) { return scalar(u[0]); };
    CHECK(hamiltonian(P, 0.0, scalar(0.0), scalar(2.0), scalar(1.0)) == doctest::Approx(6.0));
    CHECK(hamiltonian_dp(P, 0.3, scalar(5.0), scalar(-1.5), scalar(9.0))[0] == -1.5);
  }

  TEST_CASE("LQ at (1, 1, 1)") {
    const auto P = lq(-1.0);
    CHECK(hamiltonian(P, 0.0, scalar(1.0), scalar(1.0), scalar(1.0)) == doctest::Approx(1.0));
    CHECK(hamiltonian_du(P, 0.0, scalar(1.0), scalar(1.0), scalar(1.0))[0] == doctest::Approx(2.0));
    CHECK(hamiltonian_dq(P, 0.0, scalar(1.0), scalar(1.0), scalar(1.0))[0] == doctest::Approx(0.0));
  }

  TEST_CASE("partials agree with central differences at random points") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    OCProblem P;
    P.n = 2;
    P.m = 1;
    P.L = [](double t, const Vec& q, const Vec& u) {
      return std::sin(t) * q[0] * q[1] + u[0] * u[0] * q[0] + std::exp(0.2 * q[1]);
    };
    P.phi = [](double t, const Vec& q, const Vec& u) {
      Vec r(2);
      r << q[1] * u[0] + t, std::cos(q[0]) - u[0] * u[0];
      return r;
    };
    for (int i = 0; i < 50; ++i) {
      Vec q(2), p(2);
      q << U(rng), U(rng);
      p << U(rng), U(rng);
      std::vector<PointState> pts{{U(rng), q, Vec(), scalar(U(rng)), p}};
      for (const auto& c : check_hamiltonian_partials(P, pts)) CHECK_MESSAGE(c.pass, c.name);
    }
  }

  TEST_CASE("dimension mismatch") {
    const auto P = lq(-1.0);
    CHECK_THROWS_AS(hamiltonian(P, 0.0, Vec::Zero(2), scalar(1.0), scalar(1.0)),
                    std::invalid_argument);
  }
}

TEST_SUITE("pontryagin_residual") {
  TEST_CASE("phi = u reduces the adjoint equation to the EL equation") {
    const double alpha = 0.6;
    const auto L = soft_spring();
    const auto P = cv_to_oc(L, scalar(0.0), scalar(1.0));
    const Grid g(0.0, 1.0, 128);
    const auto q = GridFn::sample_scalar(g, [](double t) { return std::sin(2 * t) + t * t; });
    const auto u = left_rl_deriv(q, FracOrder(alpha));
    GridFn p(g, 1);
    for (std::size_t k = 0; k < g.size(); ++k) p(k, 0) = -L.dd(g.node(k), q.row(k), u.row(k))[0];
    const auto r = pontryagin_residual(P, q, u, p, FracOrder(alpha));
    const auto el = el_residual(L, q, FracOrder(alpha));
    for (std::size_t k = 0; k < g.size(); ++k) {
      CHECK(std::abs(r.stat(k, 0)) <= 1e-12);
      CHECK(std::abs(r.dyn(k, 0)) <= 1e-12);
      // right(p) - dH/dq = -(right(dL/dd) + dL/dq).
      CHECK(std::abs(r.adj(k, 0) + el(k, 0)) <= 1e-10);
    }
  }

  TEST_CASE("classical LQ extremal with phi = u") {
    // q'' = q, q(0) = 1, q'(1) = 0: q = cosh(1 - t)/cosh 1, u = q', p = -u.
    const auto P = lq(0.0);
    for (int n : {128, 512}) {
      const Grid g(0.0, 1.0, n);
      const double c = std::cosh(1.0);
      const auto q = GridFn::sample_scalar(g, [c](double t) { return std::cosh(1 - t) / c; });
      const auto u = GridFn::sample_scalar(g, [c](double t) { return -std::sinh(1 - t) / c; });
      const auto p = GridFn::sample_scalar(g, [c](double t) { return std::sinh(1 - t) / c; });
      const auto r = pontryagin_residual(P, q, u, p, FracOrder(1.0));
      const auto w = interior_window(g);
      CHECK(window_sup(r.dyn, w) <= g.h());
      CHECK(window_sup(r.adj, w) <= g.h());
      CHECK(window_sup(r.stat, w) <= 1e-15);
    }
  }

  TEST_CASE("origin is an extremal") {
    const Grid g(0.0, 1.0, 32);
    const GridFn z(g, 1);
    const auto r = pontryagin_residual(lq(-1.0), z, z, z, FracOrder(0.5));
    CHECK(window_sup(r.dyn, {0, 32}) == 0.0);
    CHECK(window_sup(r.adj, {0, 32}) == 0.0);
    CHECK(window_sup(r.stat, {0, 32}) == 0.0);
  }
}

TEST_SUITE("solve_extremal") {
  TEST_CASE("LQ at classical order matches a shooting oracle") {
    const auto oracle = lq_shooting(2048);
    const Grid g(0.0, 1.0, 256);
    const auto e = solve_extremal(lq(-1.0), FracOrder(1.0), g, {});
    REQUIRE(e.converged);
    double err = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      err = std::max(err, std::abs(e.q(k, 0) - oracle.q[k * 8]));
    }
    CHECK(err <= 5e-2);
    CHECK(e.r_dyn <= 1e-10);
    CHECK(e.r_adj <= 1e-10);
    CHECK(e.r_stat <= 1e-10);
  }

  TEST_CASE("kinetic action gives the straight line") {
    const auto P = cv_to_oc(kinetic(), scalar(0.0), scalar(1.0));
    const Grid g(0.0, 1.0, 64);
    const auto e = solve_extremal(P, FracOrder(1.0), g, {});
    REQUIRE(e.converged);
    for (std::size_t k = 0; k < g.size(); ++k) CHECK(std::abs(e.q(k, 0) - g.node(k)) <= g.h());
    CHECK(e.q(64, 0) == 1.0);
  }

  TEST_CASE("half order converges and self-converges") {
    // No closed form: the gap between successive refinements should halve.
    std::vector<Extremal> sols;
    for (int n : {64, 128, 256, 512}) {
      sols.push_back(solve_extremal(lq(-1.0), FracOrder(0.5), Grid(0.0, 1.0, n), {}));
      REQUIRE(sols.back().converged);
      CHECK(sols.back().r_dyn <= 1e-10);
      CHECK(sols.back().r_adj <= 1e-10);
      CHECK(sols.back().r_stat <= 1e-10);
    }
    std::vector<double> gaps;
    for (std::size_t i = 0; i + 1 < sols.size(); ++i) {
      // Coarse nodes 0..N of level i coincide with even nodes of level i+1;
      // compare on the coarse interior window.
      const auto w = interior_window(sols[i].q.grid());
      double gap = 0.0;
      for (std::size_t k = w.first; k <= w.last; ++k) {
        gap = std::max(gap, std::abs(sols[i].q(k, 0) - sols[i + 1].q(2 * k, 0)));
      }
      gaps.push_back(gap);
    }
    for (std::size_t i = 0; i + 1 < gaps.size(); ++i) {
      const double ratio = gaps[i] / gaps[i + 1];
      INFO("gap ratio " << ratio);
      CHECK(ratio >= 1.4);
      CHECK(ratio <= 2.6);
    }
  }

  TEST_CASE("CV reduction agrees with a direct EL solve") {
    const double alpha = 0.7;
    const auto L = soft_spring();
    const Grid g(0.0, 1.0, 64);
    SolveOptions opt;
    opt.tol = 1e-10;
    const auto e = solve_extremal(cv_to_oc(L, scalar(0.0), scalar(1.0)), FracOrder(alpha), g, opt);
    REQUIRE(e.converged);
    NewtonOptions nopt;
    nopt.tol = 1e-10;
    const auto el = solve_el(L, scalar(0.0), scalar(1.0), g, FracOrder(alpha), nopt);
    REQUIRE(el.newton.converged);
    for (std::size_t k = 0; k < g.size(); ++k) {
      CHECK(std::abs(e.p(k, 0) + e.u(k, 0)) <= 1e-9);
      CHECK(std::abs(e.q(k, 0) - el.q(k, 0)) <= 1e-9);
    }
  }

  TEST_CASE("iteration cap yields a diagnostic") {
    SolveOptions opt;
    opt.max_iter = 0;
    const auto e = solve_extremal(lq(-1.0), FracOrder(0.5), Grid(0.0, 1.0, 16), opt);
    CHECK_FALSE(e.converged);
    CHECK_FALSE(e.diagnostic.empty());
  }

  TEST_CASE("singular Jacobian names the node") {
    // phi independent of u: stationarity dH/du = 0 has no u dependence at all.
    OCProblem P;
    P.L = [](double, const Vec& q, const Vec&) { return 0.5 * q[0] * q[0]; };
    P.phi = [](double, const Vec& q, const Vec&) { return scalar(-q[0]); };
    P.q_a = scalar(1.0);
    const auto e = solve_extremal(P, FracOrder(0.5), Grid(0.0, 1.0, 8), {});
    CHECK_FALSE(e.converged);
    CHECK(e.diagnostic.find("node") != std::string::npos);
  }

  TEST_CASE("invalid tolerance") {
    SolveOptions opt;
    opt.tol = 0.0;
    CHECK_THROWS_AS(solve_extremal(lq(-1.0), FracOrder(0.5), Grid(0.0, 1.0, 8), opt),
                    std::invalid_argument);
  }
}

TEST_SUITE("noether_charge_oc") {
  TEST_CASE("classical order reduces to H tau - p xi pointwise") {
    const auto P = lq(-1.0);
    OCSymmetry S = time_translation(1, 1);
    S.tau = [](double t, const Vec& q, const Vec&, const Vec&) { return 0.5 + t * q[0]; };
    S.xi = [](double t, const Vec& q, const Vec& u, const Vec&) { return scalar(t - q[0] * u[0]); };
    const auto c = noether_charge_oc(P, S, FracOrder(1.0));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    for (int i = 0; i < 100; ++i) {
      const PointState s{U(rng), scalar(U(rng)), scalar(U(rng)), scalar(U(rng)), scalar(U(rng))};
      const double expected = hamiltonian(P, s.t, s.q, s.u, s.p) * S.tau(s.t, s.q, s.u, s.p) -
                              s.p[0] * S.xi(s.t, s.q, s.u, s.p)[0];
      CHECK(value_at(c, s) == doctest::Approx(expected).epsilon(1e-14));
    }
  }

  TEST_CASE("time translation gives H - (1 - alpha) p d") {
    const auto P = lq(-1.0);
    const auto c = noether_charge_oc(P, time_translation(1, 1), FracOrder(0.25));
    const PointState s{0.4, scalar(0.5), scalar(-0.3), scalar(1.2), scalar(0.8)};
    const double H = hamiltonian(P, s.t, s.q, s.u, s.p);
    CHECK(value_at(c, s) == doctest::Approx(H - 0.75 * 0.8 * -0.3));
  }

  TEST_CASE("zero generator gives zero residual") {
    const auto e = solve_extremal(lq(-1.0), FracOrder(0.5), Grid(0.0, 1.0, 64), {});
    REQUIRE(e.converged);
    const auto rep = conservation_check_oc(noether_charge_oc(lq(-1.0), zero_symmetry(), FracOrder(0.5)), e,
                                           FracOrder(0.5), 1e-300);
    CHECK(rep.charge_residual == 0.0);
    CHECK(rep.pass);
  }
}

TEST_SUITE("conservation_check_oc") {
  TEST_CASE("Hamiltonian is preserved at classical order") {
    const Grid g(0.0, 1.0, 512);
    const auto P = lq(-1.0);
    const auto e = solve_extremal(P, FracOrder(1.0), g, {});
    REQUIRE(e.converged);
    const auto rep = conservation_check_oc(noether_charge_oc(P, time_translation(1, 1), FracOrder(1.0)),
                                           e, FracOrder(1.0), g.h());
    CHECK(rep.charge_spread <= g.h());
    CHECK(rep.pass);
  }

  TEST_CASE("half order residual decreases with N") {
    const auto P = lq(-1.0);
    std::vector<double> res;
    for (int n : {64, 128, 256}) {
      const Grid g(0.0, 1.0, n);
      const auto e = solve_extremal(P, FracOrder(0.5), g, {});
      REQUIRE(e.converged);
      const auto rep = conservation_check_oc(noether_charge_oc(P, time_translation(1, 1), FracOrder(0.5)),
                                             e, FracOrder(0.5), g.h());
      CHECK(rep.pass);
      res.push_back(rep.charge_residual);
    }
    CHECK(res[1] < res[0]);
    CHECK(res[2] < res[1]);
  }

  TEST_CASE("unconverged extremal is rejected") {
    SolveOptions opt;
    opt.max_iter = 0;
    const auto e = solve_extremal(lq(-1.0), FracOrder(0.5), Grid(0.0, 1.0, 16), opt);
    const auto c = noether_charge_oc(lq(-1.0), time_translation(1, 1), FracOrder(0.5));
    CHECK_THROWS_AS(conservation_check_oc(c, e, FracOrder(0.5), 1.0), std::invalid_argument);
  }
}

TEST_SUITE("invariance_check_oc") {
  const std::vector<double> eps{1e-2, 5e-3, 2.5e-3};

  TEST_CASE("autonomous problem is exactly invariant") {
    const auto P = lq(-1.0);
    const auto e = solve_extremal(P, FracOrder(0.5), Grid(0.0, 1.0, 64), {});
    REQUIRE(e.converged);
    const auto rep = invariance_check_oc(P, time_translation(1, 1), e, FracOrder(0.5), eps);
    CHECK(rep.exact);
    CHECK(rep.invariant);
  }

  TEST_CASE("explicit time dependence gives slope one") {
    OCProblem P;
    P.L = [](double t, const Vec&, const Vec& u) { return t * u[0] * u[0]; };
    P.phi = [](double, const Vec&, const Vec& u) { return scalar(u[0]); };
    // Analytic partials: difference quotients sit near 1e-10 and would stall Newton.
    P.dL_dq = [](double, const Vec&, const Vec&) { return scalar(0.0); };
    P.dL_du = [](double t, const Vec&, const Vec& u) { return scalar(2.0 * t * u[0]); };
    P.q_a = scalar(0.0);
    P.q_b = scalar(1.0);
    const auto e = solve_extremal(P, FracOrder(0.5), Grid(1.0, 2.0, 64), {});
    REQUIRE(e.converged);
    const auto rep = invariance_check_oc(P, time_translation(1, 1), e, FracOrder(0.5), eps);
    CHECK_FALSE(rep.invariant);
    CHECK(rep.slope == doctest::Approx(1.0).epsilon(0.05));
    const auto zero = invariance_check_oc(P, time_translation(1, 1), e, FracOrder(0.5), {0.0});
    CHECK(zero.residuals[0] == 0.0);
  }

  TEST_CASE("state-dependent tau is unsupported") {
    const auto P = lq(-1.0);
    const auto e = solve_extremal(P, FracOrder(0.5), Grid(0.0, 1.0, 16), {});
    OCSymmetry S = time_translation(1, 1);
    S.tau = [](double, const Vec& q, const Vec&, const Vec&) { return q[0]; };
    CHECK_THROWS_AS(invariance_check_oc(P, S, e, FracOrder(0.5), eps), UnsupportedTransformation);
  }
}
