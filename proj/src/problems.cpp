#include "fracnoether/problems.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <random>

namespace fracnoether {

namespace {

Vec scalar(double v) { return Vec::Constant(1, v); }
Mat scalar_mat(double v) { return Mat::Constant(1, 1, v); }

double param(const Params& p, const std::string& key) {
  const auto it = p.find(key);
  if (it == p.end()) throw std::logic_error("missing parameter " + key);
  return it->second;
}

NamedCVSymmetry cv_time_translation() {
  return {"time-translation", CVSymmetry{[](double, const Vec&) { return 1.0; },
                                         [](double, const Vec& q) { return Vec::Zero(q.size()).eval(); }}};
}

// L = (wq q^2 + wu u^2)/2, phi = -decay q + u. Autonomous, free terminal state.
ProblemSpec build_autonomous_lq(const Params& p) {
  const double wq = param(p, "wq");
  const double wu = param(p, "wu");
  const double decay = param(p, "decay");
  OCProblem P;
  P.n = 1;
  P.m = 1;
  P.L = [wq, wu](double, const Vec& q, const Vec& u) {
    return 0.5 * (wq * q[0] * q[0] + wu * u[0] * u[0]);
  };
  P.phi = [decay](double, const Vec& q, const Vec& u) { return scalar(-decay * q[0] + u[0]); };
  P.dL_dq = [wq](double, const Vec& q, const Vec&) { return scalar(wq * q[0]); };
  P.dL_du = [wu](double, const Vec&, const Vec& u) { return scalar(wu * u[0]); };
  P.dphi_dq = [decay](double, const Vec&, const Vec&) { return scalar_mat(-decay); };
  P.dphi_du = [](double, const Vec&, const Vec&) { return scalar_mat(1.0); };
  P.q_a = scalar(param(p, "q_a"));
  if (param(p, "fix_terminal") != 0.0) P.q_b = scalar(param(p, "q_b"));

  ProblemSpec s;
  s.name = "autonomous_lq";
  s.kind = ProblemKind::oc;
  s.autonomous = true;
  s.problem = std::move(P);
  s.symmetries = std::vector<NamedOCSymmetry>{{"time-translation", time_translation(1, 1)}};
  s.parameters = p;
  s.doc =
      "Autonomous linear-quadratic problem: minimise int (wq q^2 + wu u^2)/2 dt subject to "
      "D^alpha q = -decay q + u, q(a) = q_a, free terminal state (set fix_terminal=1 to pin "
      "q(b) = q_b). Neither L nor phi depends on t, so time translations are a symmetry and "
      "H - (1-alpha) p D^alpha q is the associated charge.";
  s.charge_constant = 1.0;
  s.regression_bound = 1.0e-3;
  s.regression_alpha = 0.5;
  return s;
}

// L = mass d^2 / 2 with q(a) = q_a, q(b) = q_b.
ProblemSpec build_cv_kinetic(const Params& p) {
  const double mass = param(p, "mass");
  CVLagrangian L;
  L.n = 1;
  L.value = [mass](double, const Vec&, const Vec& d) { return 0.5 * mass * d[0] * d[0]; };
  L.dq = [](double, const Vec&, const Vec&) { return scalar(0.0); };
  L.dd = [mass](double, const Vec&, const Vec& d) { return scalar(mass * d[0]); };

  ProblemSpec s;
  s.name = "cv_kinetic";
  s.kind = ProblemKind::cv;
  s.autonomous = true;
  s.problem = CVProblem{L, scalar(param(p, "q_a")), scalar(param(p, "q_b"))};
  s.symmetries = std::vector<NamedCVSymmetry>{
      cv_time_translation(),
      {"space-translation", CVSymmetry{[](double, const Vec&) { return 0.0; },
                                       [](double, const Vec&) { return scalar(1.0); }}},
  };
  s.parameters = p;
  s.doc =
      "Kinetic action int mass (D^alpha q)^2 / 2 dt with both endpoints fixed; as an optimal "
      "control problem it is phi = u. Space translations leave the action invariant only for "
      "alpha = 1 because the fractional derivative of a constant does not vanish.";
  s.charge_constant = 1.0;
  return s;
}

// Harmonic oscillator L = (d^2 - omega^2 q^2)/2 at alpha = 1.
ProblemSpec build_classical_energy(const Params& p) {
  const double w2 = param(p, "omega") * param(p, "omega");
  CVLagrangian L;
  L.n = 1;
  L.value = [w2](double, const Vec& q, const Vec& d) {
    return 0.5 * (d[0] * d[0] - w2 * q[0] * q[0]);
  };
  L.dq = [w2](double, const Vec& q, const Vec&) { return scalar(-w2 * q[0]); };
  L.dd = [](double, const Vec&, const Vec& d) { return scalar(d[0]); };

  ProblemSpec s;
  s.name = "classical_energy";
  s.kind = ProblemKind::cv;
  s.autonomous = true;
  s.problem = CVProblem{L, scalar(param(p, "q_a")), scalar(param(p, "q_b"))};
  s.symmetries = std::vector<NamedCVSymmetry>{cv_time_translation()};
  s.parameters = p;
  s.doc =
      "Harmonic oscillator (d^2 - omega^2 q^2)/2 with fixed endpoints, solved at alpha = 1. "
      "The time-translation charge is minus the energy -L + dL/dd . d, which stays constant "
      "along the extremal.";
  s.fixed_alpha = 1.0;
  s.charge_constant = 1.0;
  return s;
}

// L = t u^2, phi = u: explicitly time dependent, so time translation is not a symmetry.
ProblemSpec build_noninvariant_t(const Params& p) {
  OCProblem P;
  P.n = 1;
  P.m = 1;
  P.L = [](double t, const Vec&, const Vec& u) { return t * u[0] * u[0]; };
  P.phi = [](double, const Vec&, const Vec& u) { return scalar(u[0]); };
  P.dL_dq = [](double, const Vec&, const Vec&) { return scalar(0.0); };
  P.dL_du = [](double t, const Vec&, const Vec& u) { return scalar(2.0 * t * u[0]); };
  P.dphi_dq = [](double, const Vec&, const Vec&) { return scalar_mat(0.0); };
  P.dphi_du = [](double, const Vec&, const Vec&) { return scalar_mat(1.0); };
  P.q_a = scalar(param(p, "q_a"));
  P.q_b = scalar(param(p, "q_b"));

  ProblemSpec s;
  s.name = "noninvariant_t";
  s.kind = ProblemKind::oc;
  s.autonomous = false;
  s.problem = std::move(P);
  s.symmetries = std::vector<NamedOCSymmetry>{{"time-translation", time_translation(1, 1)}};
  s.parameters = p;
  s.doc =
      "Negative control: int t u^2 dt with D^alpha q = u on [1, 2], q fixed at both ends. "
      "The explicit t dependence breaks time-translation invariance at first order in eps.";
  s.a = 1.0;
  s.b = 2.0;
  s.charge_constant = 1.0;
  return s;
}

struct Entry {
  std::string name;
  Params defaults;
  std::function<ProblemSpec(const Params&)> build;
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      {"autonomous_lq",
       {{"wq", 1.0}, {"wu", 1.0}, {"decay", 1.0}, {"q_a", 1.0}, {"fix_terminal", 0.0}, {"q_b", 1.0}},
       build_autonomous_lq},
      {"cv_kinetic", {{"mass", 1.0}, {"q_a", 0.0}, {"q_b", 1.0}}, build_cv_kinetic},
      {"classical_energy", {{"omega", 1.0}, {"q_a", 0.0}, {"q_b", 1.0}}, build_classical_energy},
      {"noninvariant_t", {{"q_a", 0.0}, {"q_b", 1.0}}, build_noninvariant_t},
  };
  return table;
}

const Entry& entry_for(const std::string& name) {
  for (const auto& e : entries()) {
    if (e.name == name) return e;
  }
  throw ProblemNotFound("unknown problem '" + name + "'");
}

}  // namespace

const std::vector<ProblemSpec>& registry() {
  static const std::vector<ProblemSpec> specs = [] {
    std::vector<ProblemSpec> out;
    for (const auto& e : entries()) out.push_back(e.build(e.defaults));
    return out;
  }();
  return specs;
}

const ProblemSpec& lookup(const std::string& name) {
  for (const auto& s : registry()) {
    if (s.name == name) return s;
  }
  throw ProblemNotFound("unknown problem '" + name + "'");
}

ProblemSpec with_parameters(const ProblemSpec& spec, const Params& params) {
  const Entry& e = entry_for(spec.name);
  Params merged = e.defaults;
  for (const auto& [key, value] : params) {
    if (!merged.contains(key)) {
      throw std::invalid_argument("problem '" + spec.name + "' has no parameter '" + key + "'");
    }
    if (!std::isfinite(value)) throw std::invalid_argument("parameter '" + key + "' is not finite");
    merged[key] = value;
  }
  return e.build(merged);
}

ProblemSpec with_overrides(const ProblemSpec& spec, const std::vector<std::string>& overrides) {
  Params params = spec.parameters;
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw std::invalid_argument("override '" + item + "' is not of the form key=value");
    }
    const std::string key = item.substr(0, eq);
    const std::string text = item.substr(eq + 1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw std::invalid_argument("override '" + item + "' has a non-numeric value");
    }
    params[key] = value;
  }
  return with_parameters(spec, params);
}

ValidationReport validate(const ProblemSpec& spec, std::uint64_t seed, int samples) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> time(spec.a, spec.b);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  auto random_vec = [&](Eigen::Index n) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = coord(rng);
    return v;
  };

  ValidationReport report;
  auto add = [&report](const PartialCheck& c) {
    report.checks.push_back({c.name, c.pass, c.max_rel_error});
    report.pass = report.pass && c.pass;
  };

  std::vector<PointState> points;
  if (spec.kind == ProblemKind::cv) {
    const auto& L = spec.cv().L;
    for (int i = 0; i < samples; ++i) {
      PointState s;
      s.t = time(rng);
      s.q = random_vec(L.n);
      s.d = random_vec(L.n);
      points.push_back(std::move(s));
    }
    for (const auto& c : check_partials(L, points)) add(c);

    PartialCheck finite{"generators finite"};
    for (const auto& sym : spec.cv_symmetries()) {
      for (const auto& s : points) {
        const double tau = sym.symmetry.tau(s.t, s.q);
        const Vec xi = sym.symmetry.xi(s.t, s.q);
        if (!std::isfinite(tau) || !xi.allFinite() || xi.size() != L.n) finite.pass = false;
      }
    }
    add(finite);
  } else {
    const auto& P = spec.oc();
    for (int i = 0; i < samples; ++i) {
      PointState s;
      s.t = time(rng);
      s.q = random_vec(P.n);
      s.u = random_vec(P.m);
      s.p = random_vec(P.n);
      points.push_back(std::move(s));
    }
    for (const auto& c : check_partials(P, points)) add(c);
    for (const auto& c : check_hamiltonian_partials(P, points)) add(c);

    PartialCheck finite{"generators finite"};
    for (const auto& sym : spec.oc_symmetries()) {
      const auto& g = sym.symmetry;
      for (const auto& s : points) {
        const double tau = g.tau(s.t, s.q, s.u, s.p);
        const Vec xi = g.xi(s.t, s.q, s.u, s.p);
        const Vec sigma = g.sigma(s.t, s.q, s.u, s.p);
        const Vec zeta = g.zeta(s.t, s.q, s.u, s.p);
        if (!std::isfinite(tau) || !xi.allFinite() || !sigma.allFinite() || !zeta.allFinite() ||
            xi.size() != P.n || sigma.size() != P.m || zeta.size() != P.n) {
          finite.pass = false;
        }
      }
    }
    add(finite);
  }
  return report;
}

}  // namespace fracnoether
