#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace fracnoether {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Uniform mesh t_k = a + k*h, k = 0..N, on [a, b].
class Grid {
 public:
  Grid(double a, double b, int intervals);

  double a() const { return a_; }
  double b() const { return b_; }
  double h() const { return h_; }
  int intervals() const { return n_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) + 1; }

  // t_0 == a and t_N == b exactly.
  double node(std::size_t k) const;
  std::vector<double> nodes() const;

  bool operator==(const Grid& other) const = default;

 private:
  double a_;
  double b_;
  int n_;
  double h_;
};

/// Fractional order alpha in (0, 1]; alpha == 1 is the classical derivative.
class FracOrder {
 public:
  explicit FracOrder(double alpha);

  double value() const { return alpha_; }
  // Ceiling n with n-1 <= alpha < n (alpha < 1) or alpha == n (classical).
  int ceiling() const { return 1; }
  bool is_classical() const { return alpha_ == 1.0; }

 private:
  double alpha_;
};

/// Vector-valued samples on a grid, one row per node.
class GridFn {
 public:
  GridFn(Grid grid, std::size_t dim);
  GridFn(Grid grid, std::size_t dim, std::vector<double> values);

  /// Samples fn(t) at every node; fn must return a vector of length dim.
  static GridFn sample(const Grid& grid, std::size_t dim,
                       const std::function<Vec(double)>& fn);
  static GridFn sample_scalar(const Grid& grid,
                              const std::function<double(double)>& fn);

  const Grid& grid() const { return grid_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return grid_.size(); }

  double& operator()(std::size_t k, std::size_t c) { return values_[k * dim_ + c]; }
  double operator()(std::size_t k, std::size_t c) const { return values_[k * dim_ + c]; }

  Vec row(std::size_t k) const;
  void set_row(std::size_t k, const Vec& v);
  std::vector<double> component(std::size_t c) const;
  const std::vector<double>& values() const { return values_; }

  bool all_finite() const;

  GridFn& operator+=(const GridFn& other);
  GridFn& operator-=(const GridFn& other);
  GridFn& operator*=(double s);

 private:
  Grid grid_;
  std::size_t dim_;
  std::vector<double> values_;
};

GridFn operator+(GridFn lhs, const GridFn& rhs);
GridFn operator-(GridFn lhs, const GridFn& rhs);
GridFn operator*(double s, GridFn f);

/// Node t_{N-k} receives f(t_k); a reflection of [a, b] onto itself.
GridFn reflect(const GridFn& f);

/// Pointwise product of two scalar grid functions.
GridFn pointwise_product(const GridFn& f, const GridFn& g);

void require_same_grid(const GridFn& f, const GridFn& g, const char* what);

/// Node range kept by convergence and conservation metrics.
struct InteriorWindow {
  std::size_t first;
  std::size_t last;  // inclusive
};

/// Default window k in [N/8, 7N/8].
InteriorWindow interior_window(const Grid& grid);

/// Sup-norm over the window (all components).
double window_sup(const GridFn& f, InteriorWindow w);
double window_spread(const GridFn& f, std::size_t component, InteriorWindow w);

/// Trapezoidal rule over the whole grid for a scalar GridFn.
double trapezoid(const GridFn& f);

/// CSV with header `t,v0,...,v{dim-1}` and `%.12e` values.
void write_csv(std::ostream& os, const GridFn& f);
std::string format_double(double v);

}  // namespace fracnoether
