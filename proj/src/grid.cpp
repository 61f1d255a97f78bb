#include "fracnoether/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace fracnoether {

Grid::Grid(double a, double b, int intervals) : a_(a), b_(b), n_(intervals), h_(0.0) {
  if (!std::isfinite(a) || !std::isfinite(b) || !(b > a)) {
    throw std::invalid_argument("grid requires finite a < b");
  }
  if (intervals < 2) throw std::invalid_argument("grid requires N >= 2 intervals");
  h_ = (b - a) / intervals;
}

double Grid::node(std::size_t k) const {
  if (k == size() - 1) return b_;
  return a_ + static_cast<double>(k) * h_;
}

std::vector<double> Grid::nodes() const {
  std::vector<double> t(size());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = node(k);
  return t;
}

FracOrder::FracOrder(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("fractional order alpha must lie in (0,1]");
  }
}

GridFn::GridFn(Grid grid, std::size_t dim)
    : grid_(grid), dim_(dim), values_(grid.size() * dim, 0.0) {
  if (dim == 0) throw std::invalid_argument("GridFn dimension must be >= 1");
}

GridFn::GridFn(Grid grid, std::size_t dim, std::vector<double> values)
    : grid_(grid), dim_(dim), values_(std::move(values)) {
  if (dim == 0) throw std::invalid_argument("GridFn dimension must be >= 1");
  if (values_.size() != grid_.size() * dim_) {
    throw std::invalid_argument("GridFn values must hold one row per grid node");
  }
}

GridFn GridFn::sample(const Grid& grid, std::size_t dim,
                      const std::function<Vec(double)>& fn) {
  GridFn f(grid, dim);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec v = fn(grid.node(k));
    if (static_cast<std::size_t>(v.size()) != dim) {
      throw std::invalid_argument("sampled function returned wrong dimension");
    }
    f.set_row(k, v);
  }
  return f;
}

GridFn GridFn::sample_scalar(const Grid& grid, const std::function<double(double)>& fn) {
  GridFn f(grid, 1);
  for (std::size_t k = 0; k < grid.size(); ++k) f(k, 0) = fn(grid.node(k));
  return f;
}

Vec GridFn::row(std::size_t k) const {
  Vec v(static_cast<Eigen::Index>(dim_));
  for (std::size_t c = 0; c < dim_; ++c) v[static_cast<Eigen::Index>(c)] = (*this)(k, c);
  return v;
}

void GridFn::set_row(std::size_t k, const Vec& v) {
  if (static_cast<std::size_t>(v.size()) != dim_) {
    throw std::invalid_argument("row dimension mismatch");
  }
  for (std::size_t c = 0; c < dim_; ++c) (*this)(k, c) = v[static_cast<Eigen::Index>(c)];
}

std::vector<double> GridFn::component(std::size_t c) const {
  std::vector<double> out(size());
  for (std::size_t k = 0; k < size(); ++k) out[k] = (*this)(k, c);
  return out;
}

bool GridFn::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

GridFn& GridFn::operator+=(const GridFn& other) {
  require_same_grid(*this, other, "GridFn +=");
  if (dim_ != other.dim_) throw std::invalid_argument("GridFn +=: dimension mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

GridFn& GridFn::operator-=(const GridFn& other) {
  require_same_grid(*this, other, "GridFn -=");
  if (dim_ != other.dim_) throw std::invalid_argument("GridFn -=: dimension mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

GridFn& GridFn::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

GridFn operator+(GridFn lhs, const GridFn& rhs) { return lhs += rhs; }
GridFn operator-(GridFn lhs, const GridFn& rhs) { return lhs -= rhs; }
GridFn operator*(double s, GridFn f) { return f *= s; }

GridFn reflect(const GridFn& f) {
  GridFn out(f.grid(), f.dim());
  const std::size_t last = f.size() - 1;
  for (std::size_t k = 0; k <= last; ++k) {
    for (std::size_t c = 0; c < f.dim(); ++c) out(last - k, c) = f(k, c);
  }
  return out;
}

GridFn pointwise_product(const GridFn& f, const GridFn& g) {
  require_same_grid(f, g, "pointwise_product");
  if (f.dim() != 1 || g.dim() != 1) {
    throw std::invalid_argument("pointwise_product expects scalar grid functions");
  }
  GridFn out(f.grid(), 1);
  for (std::size_t k = 0; k < f.size(); ++k) out(k, 0) = f(k, 0) * g(k, 0);
  return out;
}

void require_same_grid(const GridFn& f, const GridFn& g, const char* what) {
  if (!(f.grid() == g.grid())) {
    throw std::invalid_argument(std::string(what) + ": grid mismatch");
  }
}

InteriorWindow interior_window(const Grid& grid) {
  const auto n = static_cast<std::size_t>(grid.intervals());
  return {n / 8, (7 * n) / 8};
}

double window_sup(const GridFn& f, InteriorWindow w) {
  double m = 0.0;
  for (std::size_t k = w.first; k <= w.last; ++k) {
    for (std::size_t c = 0; c < f.dim(); ++c) m = std::max(m, std::abs(f(k, c)));
  }
  return m;
}

double window_spread(const GridFn& f, std::size_t component, InteriorWindow w) {
  double lo = f(w.first, component);
  double hi = lo;
  for (std::size_t k = w.first; k <= w.last; ++k) {
    lo = std::min(lo, f(k, component));
    hi = std::max(hi, f(k, component));
  }
  return hi - lo;
}

double trapezoid(const GridFn& f) {
  if (f.dim() != 1) throw std::invalid_argument("trapezoid expects a scalar grid function");
  const std::size_t last = f.size() - 1;
  double sum = 0.5 * (f(0, 0) + f(last, 0));
  for (std::size_t k = 1; k < last; ++k) sum += f(k, 0);
  return sum * f.grid().h();
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

void write_csv(std::ostream& os, const GridFn& f) {
  os << "t";
  for (std::size_t c = 0; c < f.dim(); ++c) os << ",v" << c;
  os << '\n';
  for (std::size_t k = 0; k < f.size(); ++k) {
    os << format_double(f.grid().node(k));
    for (std::size_t c = 0; c < f.dim(); ++c) os << ',' << format_double(f(k, c));
    os << '\n';
  }
}

}  // namespace fracnoether
