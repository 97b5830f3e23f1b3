#pragma once

/// Macroscopic fields of a discrete distribution: density, bulk velocity,
/// stress tensor, translational/internal energies and the equipartition
/// temperatures.

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "polykin/error.hpp"
#include "polykin/linalg.hpp"
#include "polykin/params.hpp"
#include "polykin/quadrature.hpp"

namespace polykin {

/// Nonnegative values of f on the nodes of a grid.
class Distribution {
 public:
  explicit Distribution(Grid grid) : grid_(std::move(grid)), values_(grid_.size(), 0.0) {}
  Distribution(Grid grid, std::vector<double> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    require_shape(values_, grid_);
  }

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::vector<double>& storage() { return values_; }

  std::size_t size() const { return values_.size(); }
  double& operator()(std::size_t k, std::size_t m) { return values_[grid_.index(k, m)]; }
  double operator()(std::size_t k, std::size_t m) const { return values_[grid_.index(k, m)]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  Distribution& operator*=(double c) {
    for (double& x : values_) x *= c;
    return *this;
  }

 private:
  Grid grid_;
  std::vector<double> values_;
};

inline void require_same_grid(const Distribution& a, const Distribution& b) {
  if (!(a.grid() == b.grid()) || a.size() != b.size())
    throw parameter_error("shape mismatch: distributions live on different grids");
}

inline double integrate(const Distribution& f) { return integrate(f.values(), f.grid()); }

struct MacroState {
  double rho = 0.0;
  Vec3 U{};
  Mat3 Theta{};  ///< stress tensor per unit mass, symmetric PSD
  double E_tr = 0.0;
  double E_I = 0.0;
  double T_tr = 0.0;
  double T_I = 0.0;
  double T_delta = 0.0;
  double delta = 2.0;

  double total_internal_energy() const { return E_tr + E_I; }
  /// Total energy including the bulk kinetic part, int (|v|^2/2 + eps) f.
  double total_energy() const { return E_tr + E_I + 0.5 * rho * dot(U, U); }

  /// Fill the energies and temperatures from rho, Theta, T_I and delta.
  void complete_from_temperatures() {
    T_tr = trace(Theta) / 3.0;
    E_tr = 1.5 * rho * T_tr;
    E_I = 0.5 * delta * rho * T_I;
    T_delta = (3.0 * T_tr + delta * T_I) / (3.0 + delta);
  }

  /// A macrostate described directly by its fields (no distribution needed).
  static MacroState from_fields(double rho, const Vec3& U, const Mat3& Theta, double T_I,
                                double delta) {
    MacroState m;
    m.rho = rho;
    m.U = U;
    m.Theta = symmetrized(Theta);
    m.T_I = T_I;
    m.delta = delta;
    m.complete_from_temperatures();
    return m;
  }
};

inline constexpr double kVacuumDensity = 1e-12;

/// Per-velocity-node energy integrals: n_k = sum_m u_m f_km and
/// e_k = sum_m u_m eps_m f_km.
struct VelocityMarginals {
  std::vector<double> mass;
  std::vector<double> internal;
};

inline VelocityMarginals velocity_marginals(const Distribution& f) {
  const Grid& g = f.grid();
  const auto ne = g.energy_size();
  const auto u = g.energy_weights();
  const auto eps = g.eps();
  VelocityMarginals out;
  out.mass.resize(g.velocity_size());
  out.internal.resize(g.velocity_size());
  const double* p = f.values().data();
  for (std::size_t k = 0; k < g.velocity_size(); ++k) {
    double n = 0.0;
    double e = 0.0;
    for (std::size_t m = 0; m < ne; ++m) {
      const double fu = p[k * ne + m] * u[m];
      n += fu;
      e += fu * eps[m];
    }
    out.mass[k] = n;
    out.internal[k] = e;
  }
  return out;
}

/// rho, U, Theta (about the discrete U, then symmetrized), E_tr, E_I and
/// the equipartition temperatures.
inline MacroState compute_macro(const Distribution& f) {
  const Grid& g = f.grid();
  for (double x : f.values())
    if (!std::isfinite(x)) throw numerical_error("distribution contains non-finite values");

  const VelocityMarginals marg = velocity_marginals(f);
  const double w = g.velocity_weight();
  double rho = 0.0;
  double e_int = 0.0;
  Vec3 mom{};
  for (std::size_t k = 0; k < g.velocity_size(); ++k) {
    const Vec3 v = g.velocity(k);
    const double n = marg.mass[k];
    rho += n;
    e_int += marg.internal[k];
    mom[0] += v[0] * n;
    mom[1] += v[1] * n;
    mom[2] += v[2] * n;
  }
  rho *= w;
  e_int *= w;
  if (!(rho >= kVacuumDensity))
    throw vacuum_error("vacuum state: density " + std::to_string(rho) + " below threshold");

  MacroState mac;
  mac.delta = g.delta();
  mac.rho = rho;
  for (int i = 0; i < 3; ++i) mac.U[i] = mom[i] * w / rho;

  Mat3 s{};
  for (std::size_t k = 0; k < g.velocity_size(); ++k) {
    const Vec3 v = g.velocity(k);
    const Vec3 c{v[0] - mac.U[0], v[1] - mac.U[1], v[2] - mac.U[2]};
    const double n = marg.mass[k];
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) s[i][j] += c[i] * c[j] * n;
  }
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      s[i][j] *= w / rho;
      s[j][i] = s[i][j];
    }
  mac.Theta = symmetrized(s);
  mac.T_tr = trace(mac.Theta) / 3.0;
  mac.E_tr = 1.5 * rho * mac.T_tr;
  mac.E_I = e_int;
  mac.T_I = 2.0 * e_int / (mac.delta * rho);
  mac.T_delta = (3.0 * mac.T_tr + mac.delta * mac.T_I) / (3.0 + mac.delta);
  return mac;
}

/// A_{nu,theta} = rho T_delta / (1 - nu + nu theta).
inline double collision_frequency(const MacroState& mac, const Params& params) {
  const double denom = 1.0 - params.nu + params.nu * params.theta;
  if (!(denom > 1e-12))
    throw parameter_error("collision frequency: 1 - nu + nu*theta must be positive");
  return mac.rho * mac.T_delta / denom;
}

}  // namespace polykin
