#include "fracnoether/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fracnoether {

double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_loglog_slope: size mismatch");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / denom;
}

double max_subinterval_integral(const GridFn& f) {
  if (f.dim() != 1) throw std::invalid_argument("max_subinterval_integral expects scalar input");
  const double h = f.grid().h();
  double running = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t k = 1; k < f.size(); ++k) {
    running += 0.5 * h * (f(k - 1, 0) + f(k, 0));
    lo = std::min(lo, running);
    hi = std::max(hi, running);
  }
  return hi - lo;
}

void PartialCheck::add(double analytic, double fd, double rel_tol) {
  const double diff = std::abs(analytic - fd);
  const double mag = std::max(std::abs(analytic), std::abs(fd));
  if (!std::isfinite(diff)) {
    pass = false;
    max_rel_error = std::numeric_limits<double>::infinity();
    return;
  }
  // Relative error is only meaningful away from zero; below 1e-6 use absolute.
  const double rel = mag > 1e-6 ? diff / mag : diff;
  max_rel_error = std::max(max_rel_error, rel);
  if (diff > rel_tol * std::max(1.0, mag)) pass = false;
}

double central_difference(const std::function<double(const Vec&)>& fn, const Vec& x,
                          Eigen::Index j) {
  const double step = 1e-6 * std::max(1.0, std::abs(x[j]));
  Vec xp = x;
  Vec xm = x;
  xp[j] += step;
  xm[j] -= step;
  return (fn(xp) - fn(xm)) / (2.0 * step);
}

}  // namespace fracnoether
