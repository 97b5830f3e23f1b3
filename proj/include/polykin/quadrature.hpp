#pragma once

/// Discretization of phase space (v, I) in R^3 x R^+ and quadrature over it.
///
/// Velocities live on a uniform midpoint lattice covering [-L, L]^3.
/// The internal-energy variable is handled through eps = I^(2/delta), so
/// that dI = (delta/2) eps^(delta/2 - 1) d eps.  We further substitute
/// eps = s^2, which turns the measure into delta s^(delta - 1) ds on
/// [0, sqrt(eps_max)]: smooth at the origin for delta >= 1, and the
/// Gaussian factor exp(-eps/T) becomes exp(-s^2/T).  The s-integral uses
/// Gauss-Legendre nodes; every Jacobian factor is folded into u_m.

#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "polykin/error.hpp"
#include "polykin/linalg.hpp"

namespace polykin {

struct GridSpec {
  double v_extent = 6.0;        ///< half-width L of the velocity box
  int v_points_per_axis = 32;   ///< even, >= 8
  double energy_variable_max = 30.0;  ///< cap on eps = I^(2/delta)
  int energy_points = 32;       ///< >= 8
  double delta = 2.0;           ///< internal degrees of freedom

  void validate() const {
    if (!(std::isfinite(v_extent) && v_extent > 0.0))
      throw parameter_error("grid: v_extent must be positive");
    if (v_points_per_axis < 8 || v_points_per_axis % 2 != 0)
      throw parameter_error("grid: v_points_per_axis must be even and >= 8");
    if (!(std::isfinite(energy_variable_max) && energy_variable_max > 0.0))
      throw parameter_error("grid: energy_variable_max must be positive");
    if (energy_points < 8) throw parameter_error("grid: energy_points must be >= 8");
    if (!(std::isfinite(delta) && delta > 0.0))
      throw parameter_error("grid: delta must be positive");
  }

  /// Extents sized for Gaussians with velocity temperatures up to `t_max`,
  /// internal temperatures up to `t_int_max` and drift `u_max`:
  /// L = width * sqrt(t_max) + u_max, eps_max = energy_factor * t_int_max.
  static GridSpec for_temperature(double t_max, double t_int_max, double u_max, double delta,
                                  int v_points = 32, int e_points = 32,
                                  double width = 6.0, double energy_factor = 30.0) {
    GridSpec s;
    s.v_extent = width * std::sqrt(t_max) + u_max;
    s.v_points_per_axis = v_points;
    s.energy_variable_max = energy_factor * t_int_max;
    s.energy_points = e_points;
    s.delta = delta;
    return s;
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Gauss-Legendre nodes and weights on [a, b], ascending nodes.
inline void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                           std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = mid - half * x;
    nodes[n - 1 - i] = mid + half * x;
    weights[i] = half * w;
    weights[n - 1 - i] = half * w;
  }
}

/// Immutable tensor-product grid. Values on it are stored velocity-major
/// with the energy index innermost: index(k, m) = k * energy_size() + m,
/// and k = (i1 * n + i2) * n + i3 for axis indices (i1, i2, i3).
///
/// Copies share the node tables, so a Grid is cheap to pass by value and
/// safe to read from many threads.
class Grid {
 public:
  Grid() : Grid(GridSpec{}) {}

  explicit Grid(const GridSpec& spec) {
    spec.validate();
    auto d = std::make_shared<Data>();
    d->spec = spec;
    const int n = spec.v_points_per_axis;
    d->h = 2.0 * spec.v_extent / n;
    d->axis.resize(n);
    for (int i = 0; i < n; ++i) d->axis[i] = -spec.v_extent + (i + 0.5) * d->h;
    // exact antisymmetry of the axis nodes
    for (int i = 0; i < n / 2; ++i) d->axis[n - 1 - i] = -d->axis[i];
    d->cell_weight = d->h * d->h * d->h;

    std::vector<double> s, ws;
    gauss_legendre(spec.energy_points, 0.0, std::sqrt(spec.energy_variable_max), s, ws);
    const double dof = spec.delta;
    d->eps.resize(s.size());
    d->internal.resize(s.size());
    d->energy_weight.resize(s.size());
    for (std::size_t m = 0; m < s.size(); ++m) {
      d->eps[m] = s[m] * s[m];
      d->internal[m] = std::pow(s[m], dof);
      d->energy_weight[m] = ws[m] * dof * std::pow(s[m], dof - 1.0);
    }
    data_ = std::move(d);
  }

  const GridSpec& spec() const { return data_->spec; }
  double delta() const { return data_->spec.delta; }
  int axis_points() const { return data_->spec.v_points_per_axis; }
  std::size_t velocity_size() const {
    const auto n = static_cast<std::size_t>(axis_points());
    return n * n * n;
  }
  std::size_t energy_size() const { return data_->eps.size(); }
  std::size_t size() const { return velocity_size() * energy_size(); }
  std::size_t index(std::size_t k, std::size_t m) const { return k * energy_size() + m; }

  double spacing() const { return data_->h; }
  std::span<const double> axis() const { return data_->axis; }

  Vec3 velocity(std::size_t k) const {
    const auto n = static_cast<std::size_t>(axis_points());
    const auto& a = data_->axis;
    return {a[k / (n * n)], a[(k / n) % n], a[k % n]};
  }
  /// Velocity weight w_k (uniform lattice, so independent of k).
  double velocity_weight(std::size_t = 0) const { return data_->cell_weight; }

  std::span<const double> eps() const { return data_->eps; }
  std::span<const double> internal() const { return data_->internal; }
  std::span<const double> energy_weights() const { return data_->energy_weight; }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.data_ == b.data_ || a.spec() == b.spec();
  }

 private:
  struct Data {
    GridSpec spec;
    double h = 0.0;
    double cell_weight = 0.0;
    std::vector<double> axis;
    std::vector<double> eps;
    std::vector<double> internal;
    std::vector<double> energy_weight;
  };
  std::shared_ptr<const Data> data_;
};

inline Grid build_grid(const GridSpec& spec) { return Grid(spec); }

inline void require_shape(std::span<const double> values, const Grid& grid) {
  if (values.size() != grid.size())
    throw parameter_error("shape mismatch: " + std::to_string(values.size()) +
                          " values for a grid of " + std::to_string(grid.size()) +
                          " nodes");
}

/// sum_{k,m} values[k,m] w_k u_m, velocity-outer / energy-inner order.
inline double integrate(std::span<const double> values, const Grid& grid) {
  require_shape(values, grid);
  const auto ne = grid.energy_size();
  const auto u = grid.energy_weights();
  double total = 0.0;
  for (std::size_t k = 0; k < grid.velocity_size(); ++k) {
    const double* row = values.data() + k * ne;
    double inner = 0.0;
    for (std::size_t m = 0; m < ne; ++m) inner += row[m] * u[m];
    total += inner;
  }
  return total * grid.velocity_weight();
}

/// One-dimensional check of the energy rule: sum_m u_m exp(-eps_m / T),
/// whose exact value on (0, inf) is Gamma(delta/2 + 1) T^(delta/2).
inline double energy_gaussian_sum(const Grid& grid, double temperature) {
  double s = 0.0;
  for (std::size_t m = 0; m < grid.energy_size(); ++m)
    s += grid.energy_weights()[m] * std::exp(-grid.eps()[m] / temperature);
  return s;
}

}  // namespace polykin
