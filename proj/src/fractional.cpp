#include "fracnoether/fractional.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fracnoether {

namespace {

void require_finite(const GridFn& f, const char* what) {
  if (!f.all_finite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite input");
  }
}

void require_order(double order) {
  if (!(order > -1.0 && order <= 1.0)) {
    throw std::invalid_argument("Grünwald-Letnikov order must lie in (-1,1]");
  }
}

enum class Side { left, right };

// out(k) = scale * sum_{j} w_j f(k -/+ j). Both sides share this loop so the
// right operator is the exact mirror of the left one.
GridFn convolve(const GridFn& f, const std::vector<double>& w, double scale, Side side) {
  const std::size_t n = f.size();
  GridFn out(f.grid(), f.dim());
  for (std::size_t c = 0; c < f.dim(); ++c) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t span = side == Side::left ? k : n - 1 - k;
      double sum = 0.0;
      for (std::size_t j = 0; j <= span; ++j) {
        const std::size_t idx = side == Side::left ? k - j : k + j;
        sum += w[j] * f(idx, c);
      }
      out(k, c) = scale * sum;
    }
  }
  return out;
}

GridFn classical_left(const GridFn& f) {
  const double h = f.grid().h();
  GridFn out(f.grid(), f.dim());
  for (std::size_t c = 0; c < f.dim(); ++c) {
    out(0, c) = f(0, c) / h;
    for (std::size_t k = 1; k < f.size(); ++k) out(k, c) = (f(k, c) - f(k - 1, c)) / h;
  }
  return out;
}

GridFn classical_right(const GridFn& f) {
  const double h = f.grid().h();
  const std::size_t last = f.size() - 1;
  GridFn out(f.grid(), f.dim());
  for (std::size_t c = 0; c < f.dim(); ++c) {
    for (std::size_t k = 0; k < last; ++k) out(k, c) = (f(k, c) - f(k + 1, c)) / h;
    out(last, c) = f(last, c) / h;
  }
  return out;
}

GridFn gl_apply(const GridFn& f, double order, Side side) {
  require_order(order);
  require_finite(f, side == Side::left ? "left_gl" : "right_gl");
  if (order == 1.0) return side == Side::left ? classical_left(f) : classical_right(f);
  const auto weights = gl_weights(order, static_cast<long>(f.size()) - 1);
  return convolve(f, weights.w, std::pow(f.grid().h(), -order), side);
}

}  // namespace

GLWeights gl_weights(double alpha, long count) {
  require_order(alpha);
  if (count < 0) throw std::invalid_argument("gl_weights: K must be >= 0");
  GLWeights out{alpha, std::vector<double>(static_cast<std::size_t>(count) + 1)};
  out.w[0] = 1.0;
  if (alpha == 1.0) {
    if (count >= 1) out.w[1] = -1.0;
    return out;
  }
  for (long k = 1; k <= count; ++k) {
    const auto i = static_cast<std::size_t>(k);
    out.w[i] = out.w[i - 1] * (static_cast<double>(k - 1) - alpha) / static_cast<double>(k);
  }
  return out;
}

GridFn left_gl(const GridFn& f, double order) { return gl_apply(f, order, Side::left); }

GridFn right_gl(const GridFn& f, double order) { return gl_apply(f, order, Side::right); }

GridFn left_rl_deriv(const GridFn& f, FracOrder alpha) { return left_gl(f, alpha.value()); }

GridFn right_rl_deriv(const GridFn& f, FracOrder alpha) { return right_gl(f, alpha.value()); }

GridFn frac_integral(const GridFn& f, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("frac_integral: p must lie in (0,1)");
  return left_gl(f, -p);
}

double gamma_fn(double x) { return std::tgamma(x); }

double reciprocal_gamma(double x) {
  if (x <= 0.0 && x == std::floor(x)) return 0.0;
  return 1.0 / std::tgamma(x);
}

double power_rule_analytic(double upsilon, double p, double a, double t) {
  if (!(upsilon > -1.0)) throw std::invalid_argument("power rule requires upsilon > -1");
  if (!(t > a)) throw std::invalid_argument("power rule requires t > a");
  const double rg = reciprocal_gamma(upsilon - p + 1.0);
  if (rg == 0.0) return 0.0;
  return std::tgamma(upsilon + 1.0) * rg * std::pow(t - a, upsilon - p);
}

GridFn d_operator(std::span<const ScalarPair> pairs, FracOrder alpha) {
  if (pairs.empty()) throw std::invalid_argument("d_operator: no pairs given");
  const Grid& grid = pairs.front().f.grid();
  GridFn out(grid, 1);
  for (const auto& pair : pairs) {
    if (!(pair.f.grid() == grid) || !(pair.g.grid() == grid)) {
      throw std::invalid_argument("d_operator: grid mismatch across pairs");
    }
    if (pair.f.dim() != 1 || pair.g.dim() != 1) {
      throw std::invalid_argument("d_operator: pairs must be scalar-valued");
    }
    const GridFn rf = right_rl_deriv(pair.f, alpha);
    const GridFn lg = left_rl_deriv(pair.g, alpha);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      out(k, 0) += -pair.g(k, 0) * rf(k, 0) + pair.f(k, 0) * lg(k, 0);
    }
  }
  return out;
}

ByPartsSides integration_by_parts_sides(const GridFn& f, const GridFn& g, FracOrder p) {
  require_same_grid(f, g, "integration_by_parts");
  if (f.dim() != 1 || g.dim() != 1) {
    throw std::invalid_argument("integration_by_parts expects scalar grid functions");
  }
  const double lhs = trapezoid(pointwise_product(left_rl_deriv(f, p), g));
  const double rhs = trapezoid(pointwise_product(f, right_rl_deriv(g, p)));
  return {lhs, rhs};
}

double integration_by_parts_residual(const GridFn& f, const GridFn& g, FracOrder p) {
  const auto sides = integration_by_parts_sides(f, g, p);
  return std::abs(sides.left_side - sides.right_side);
}

}  // namespace fracnoether
