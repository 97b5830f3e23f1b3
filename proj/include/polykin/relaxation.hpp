#pragma once

/// Time integration of  df/dt + v1 df/dx = A (M(f) - f):  space-homogeneous
/// relaxation with three schemes, a moment-matching projection of M, and a
/// periodic 1D slab with Strang splitting of transport and relaxation.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "polykin/entropy.hpp"
#include "polykin/error.hpp"
#include "polykin/gaussian.hpp"
#include "polykin/moments.hpp"
#include "polykin/parallel.hpp"
#include "polykin/params.hpp"
#include "polykin/quadrature.hpp"

namespace polykin {

enum class Scheme { explicit_euler, rk4, exponential };

inline std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::explicit_euler: return "explicit-euler";
    case Scheme::rk4: return "rk4";
    case Scheme::exponential: return "exponential";
  }
  return "?";
}

inline Scheme parse_scheme(const std::string& name) {
  if (name == "explicit-euler") return Scheme::explicit_euler;
  if (name == "rk4") return Scheme::rk4;
  if (name == "exponential") return Scheme::exponential;
  throw parameter_error("unknown scheme '" + name + "'");
}

struct SlabConfig {
  int x_cells = 64;
  double x_length = 1.0;
};

struct RunConfig {
  Params params;
  GridSpec grid;
  double t_end = 1.0;
  double dt = 0.01;
  Scheme scheme = Scheme::exponential;
  bool conservative_projection = true;
  std::optional<SlabConfig> slab;
  int sample_every = 1;
  /// Allowed per-step increase of H before a step is flagged.
  double h_tolerance = 1e-10;

  void validate() const {
    params.validate();
    grid.validate();
    if (!(dt > 0.0 && std::isfinite(dt))) throw parameter_error("dt must be positive");
    if (!(t_end >= 0.0 && std::isfinite(t_end))) throw parameter_error("t_end must be >= 0");
    if (sample_every < 1) throw parameter_error("sample_every must be >= 1");
    if (slab && (slab->x_cells < 1 || !(slab->x_length > 0.0)))
      throw parameter_error("slab needs x_cells >= 1 and x_length > 0");
    if (std::fabs(grid.delta - params.delta) > 1e-14 * std::fmax(1.0, params.delta))
      throw parameter_error("grid delta and params delta differ");
  }

  int steps() const { return static_cast<int>(std::ceil(t_end / dt - 1e-9)); }
};

// ---------------------------------------------------------------------------
// Moment-matching projection

/// Exact moments of M_{nu,theta}(f): density, bulk velocity, translational
/// energy about U (rho tr T / 2) and internal energy (delta rho T_theta / 2).
struct MomentTargets {
  double rho = 0.0;
  Vec3 U{};
  double E_tr = 0.0;
  double E_I = 0.0;
};

inline MomentTargets gaussian_targets(const MacroState& mac, const Params& p) {
  MomentTargets t;
  t.rho = mac.rho;
  t.U = mac.U;
  t.E_tr = 1.5 * mac.rho * ((1.0 - p.theta) * mac.T_tr + p.theta * mac.T_delta);
  t.E_I = 0.5 * mac.delta * mac.rho * relaxation_temperature(mac, p);
  return t;
}

struct ProjectionResult {
  Distribution values;
  bool converged = false;
  int iterations = 0;
  std::array<double, 6> coefficients{};  ///< (a, b1, b2, b3, c_tr, c_int)
  double residual = 0.0;                 ///< max scaled moment mismatch at exit
};

/// Multiply M by exp(a + b.(v-U) + c_tr |v-U|^2/2 + c_int eps) with the six
/// coefficients chosen by damped Newton so that the discrete density,
/// momentum, translational and internal energies equal `targets`.  Total
/// energy then matches that of f; when theta = 0 both energy parts do.
/// On non-convergence within `max_iter` the uncorrected M is returned.
inline ProjectionResult conservative_projection(const Distribution& mg, const MomentTargets& tg,
                                                double temperature_scale, int max_iter = 50,
                                                double tol = 1e-14) {
  const Grid& g = mg.grid();
  const std::size_t nv = g.velocity_size();
  const std::size_t ne = g.energy_size();
  const auto u = g.energy_weights();
  const auto eps = g.eps();
  const double w = g.velocity_weight();
  for (double x : mg.values())
    if (!(x > 0.0)) throw parameter_error("projection needs a strictly positive Gaussian");

  const double ts = temperature_scale;
  const std::array<double, 6> scale{tg.rho, tg.rho * std::sqrt(ts), tg.rho * std::sqrt(ts),
                                    tg.rho * std::sqrt(ts), tg.rho * ts, tg.rho * ts};
  const std::array<double, 6> target{tg.rho, 0.0, 0.0, 0.0, tg.E_tr, tg.E_I};

  std::vector<std::array<double, 4>> vbasis(nv);  // c1, c2, c3, |c|^2/2
  for (std::size_t k = 0; k < nv; ++k) {
    const Vec3 v = g.velocity(k);
    const Vec3 c{v[0] - tg.U[0], v[1] - tg.U[1], v[2] - tg.U[2]};
    vbasis[k] = {c[0], c[1], c[2], 0.5 * dot(c, c)};
  }

  std::vector<double> gv(nv), ge(ne);
  auto tilt = [&](const Eigen::Matrix<double, 6, 1>& lam) {
    for (std::size_t k = 0; k < nv; ++k)
      gv[k] = std::exp(lam[0] + lam[1] * vbasis[k][0] + lam[2] * vbasis[k][1] +
                       lam[3] * vbasis[k][2] + lam[4] * vbasis[k][3]);
    for (std::size_t m = 0; m < ne; ++m) ge[m] = std::exp(lam[5] * eps[m]);
  };

  // Moments G = int phi M_lam and Jacobian J = int phi phi^T M_lam.
  auto moments = [&](Eigen::Matrix<double, 6, 1>& G, Eigen::Matrix<double, 6, 6>& J) {
    G.setZero();
    J.setZero();
    const double* p = mg.values().data();
    for (std::size_t k = 0; k < nv; ++k) {
      double s0 = 0.0, s1 = 0.0, s2 = 0.0;
      for (std::size_t m = 0; m < ne; ++m) {
        const double x = p[k * ne + m] * ge[m] * u[m];
        s0 += x;
        s1 += x * eps[m];
        s2 += x * eps[m] * eps[m];
      }
      s0 *= gv[k];
      s1 *= gv[k];
      s2 *= gv[k];
      const double phi[5] = {1.0, vbasis[k][0], vbasis[k][1], vbasis[k][2], vbasis[k][3]};
      for (int i = 0; i < 5; ++i) {
        G[i] += phi[i] * s0;
        for (int j = i; j < 5; ++j) J(i, j) += phi[i] * phi[j] * s0;
        J(i, 5) += phi[i] * s1;
      }
      G[5] += s1;
      J(5, 5) += s2;
    }
    G *= w;
    J *= w;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < i; ++j) J(i, j) = J(j, i);
  };

  auto scaled_residual = [&](const Eigen::Matrix<double, 6, 1>& G) {
    double r = 0.0;
    for (int i = 0; i < 6; ++i) r = std::max(r, std::fabs(G[i] - target[i]) / scale[i]);
    return r;
  };

  Eigen::Matrix<double, 6, 1> lam = Eigen::Matrix<double, 6, 1>::Zero();
  Eigen::Matrix<double, 6, 1> G;
  Eigen::Matrix<double, 6, 6> J;
  tilt(lam);
  moments(G, J);
  double res = scaled_residual(G);

  ProjectionResult out{mg, false, 0, {}, res};
  int it = 0;
  while (res > tol && it < max_iter) {
    ++it;
    Eigen::Matrix<double, 6, 1> rhs;
    for (int i = 0; i < 6; ++i) rhs[i] = target[i] - G[i];
    const Eigen::Matrix<double, 6, 1> step = J.ldlt().solve(rhs);
    if (!step.allFinite()) break;
    double damping = 1.0;
    bool accepted = false;
    for (int half = 0; half < 30; ++half) {
      const Eigen::Matrix<double, 6, 1> trial = lam + damping * step;
      tilt(trial);
      Eigen::Matrix<double, 6, 1> Gt;
      Eigen::Matrix<double, 6, 6> Jt;
      moments(Gt, Jt);
      const double rt = scaled_residual(Gt);
      if (rt < res || rt <= tol) {
        lam = trial;
        G = Gt;
        J = Jt;
        res = rt;
        accepted = true;
        break;
      }
      damping *= 0.5;
    }
    if (!accepted) break;
  }
  out.iterations = it;
  out.residual = res;
  if (res > tol && res > 64.0 * std::numeric_limits<double>::epsilon()) {
    // no convergence: hand back M unchanged
    return out;
  }
  out.converged = true;
  for (int i = 0; i < 6; ++i) out.coefficients[i] = lam[i];
  if (it == 0) return out;
  tilt(lam);
  double* q = out.values.values().data();
  for (std::size_t k = 0; k < nv; ++k)
    for (std::size_t m = 0; m < ne; ++m) q[k * ne + m] *= gv[k] * ge[m];
  return out;
}

inline ProjectionResult conservative_projection(const Distribution& mg, const MacroState& mac,
                                                const Params& p) {
  return conservative_projection(mg, gaussian_targets(mac, p), mac.T_delta);
}

// ---------------------------------------------------------------------------
// Homogeneous relaxation

/// Everything the relaxation operator needs at one state.
struct RelaxationTarget {
  MacroState mac;
  double A = 0.0;
  Distribution gaussian;
  bool projected = false;
  bool projection_failed = false;
};

inline RelaxationTarget relaxation_target(const Distribution& f, const Params& p, bool project) {
  MacroState mac = compute_macro(f);
  const double A = collision_frequency(mac, p);
  Distribution mg = build_gaussian(mac, p, f.grid());
  RelaxationTarget t{mac, A, std::move(mg), false, false};
  if (project) {
    ProjectionResult pr = conservative_projection(t.gaussian, mac, p);
    t.projected = pr.converged;
    t.projection_failed = !pr.converged;
    if (pr.converged) t.gaussian = std::move(pr.values);
  }
  return t;
}

inline void check_positive_after_step(const Distribution& f) {
  double peak = 0.0;
  double lowest = 0.0;
  for (double x : f.values()) {
    peak = std::max(peak, std::fabs(x));
    lowest = std::min(lowest, x);
  }
  if (lowest < -1e-14 * peak)
    throw numerical_error("scheme produced negative values (min " + std::to_string(lowest) + ")");
}

/// Advance one step given the target already built at the step start.
inline Distribution step_with_target(const Distribution& f, const RelaxationTarget& tgt,
                                     const RunConfig& cfg, double dt) {
  const Params& p = cfg.params;
  Distribution out(f.grid());
  const double* pf = f.values().data();
  const double* pm = tgt.gaussian.values().data();
  double* po = out.values().data();
  const std::size_t n = f.size();

  switch (cfg.scheme) {
    case Scheme::explicit_euler: {
      const double lam = dt * tgt.A;
      if (lam > 1.0 + 1e-12)
        throw parameter_error("explicit-euler stability violated: dt*A = " + std::to_string(lam));
      if (lam >= 1.0) {
        for (std::size_t i = 0; i < n; ++i) po[i] = pm[i];
      } else {
        for (std::size_t i = 0; i < n; ++i) po[i] = (1.0 - lam) * pf[i] + lam * pm[i];
      }
      break;
    }
    case Scheme::exponential: {
      const double decay = std::exp(-tgt.A * dt);
      const double gain = -std::expm1(-tgt.A * dt);
      for (std::size_t i = 0; i < n; ++i) po[i] = decay * pf[i] + gain * pm[i];
      break;
    }
    case Scheme::rk4: {
      auto rhs_with = [&](const Distribution& g, const RelaxationTarget& t) {
        std::vector<double> k(n);
        const double* gv = g.values().data();
        const double* mv = t.gaussian.values().data();
        for (std::size_t i = 0; i < n; ++i) k[i] = t.A * (mv[i] - gv[i]);
        return k;
      };
      auto rhs = [&](const Distribution& g) {
        return rhs_with(g, relaxation_target(g, p, cfg.conservative_projection));
      };
      auto axpy = [&](double a, const std::vector<double>& k) {
        Distribution s(f.grid());
        double* ps = s.values().data();
        for (std::size_t i = 0; i < n; ++i) ps[i] = pf[i] + a * k[i];
        return s;
      };
      const auto k1 = rhs_with(f, tgt);
      const auto k2 = rhs(axpy(0.5 * dt, k1));
      const auto k3 = rhs(axpy(0.5 * dt, k2));
      const auto k4 = rhs(axpy(dt, k3));
      for (std::size_t i = 0; i < n; ++i)
        po[i] = pf[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      break;
    }
  }
  check_positive_after_step(out);
  return out;
}

/// One step of df/dt = A (M(f) - f).
inline Distribution step_homogeneous(const Distribution& f, const RunConfig& cfg) {
  const RelaxationTarget tgt = relaxation_target(f, cfg.params, cfg.conservative_projection);
  return step_with_target(f, tgt, cfg, cfg.dt);
}

// ---------------------------------------------------------------------------
// Trajectories

struct TrajectorySample {
  double t = 0.0;
  MacroState mac;
  double H = 0.0;
  double D = 0.0;
  double R_closed = 0.0;
  double drift_mass = 0.0;
  double drift_momentum = 0.0;
  double drift_energy = 0.0;
  double drift_E_tr = 0.0;  ///< |E_tr - E_tr(0)| / E_tr(0), total over cells for slabs
  double drift_E_I = 0.0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::vector<double> step_H;  ///< H after every step, index 0 = initial
  double max_H_increase = -std::numeric_limits<double>::infinity();
  std::size_t monotonicity_violations = 0;
  bool theorem_regime = false;
  bool h_monotone = true;  ///< false when a flagged violation occurred in the theorem regime
  double collision_frequency = 0.0;  ///< initial A (slab: maximum over cells)
  double truncation_bound = 0.0;
  std::size_t projection_failures = 0;
  std::vector<std::string> warnings;
  std::optional<Distribution> final_state;
  std::optional<std::vector<Distribution>> final_field;
};

/// A-priori estimate of the relative moment defect the grid introduces per
/// evaluation of M, for velocity variances in [var_lo, var_hi], drift up to
/// u_max, and internal temperatures in [t_lo, t_hi].  Velocity part: Gaussian
/// tail beyond the box plus the leading aliasing term of the midpoint rule;
/// energy part: measured error of the 1D rule on exp(-eps/T) and eps exp(-eps/T).
inline double grid_moment_defect(const Grid& g, double var_lo, double var_hi, double u_max,
                                 double t_lo, double t_hi) {
  const double L = g.spec().v_extent;
  const double h = g.spacing();
  const double z = std::max(0.0, (L - u_max) / std::sqrt(var_hi));
  const double tail_mass = std::erfc(z / std::numbers::sqrt2);
  const double tail_second = tail_mass + std::sqrt(2.0 / std::numbers::pi) * z * std::exp(-0.5 * z * z);
  const double a = 2.0 * std::numbers::pi * std::numbers::pi * var_lo / (h * h);
  const double alias = 2.0 * std::exp(-a) / (1.0 - std::exp(-a));
  const double alias_second = alias * (1.0 + 2.0 * a);

  double energy = 0.0;
  const double d = g.delta();
  for (double T : {t_lo, std::sqrt(t_lo * t_hi), t_hi}) {
    double m0 = 0.0, m1 = 0.0;
    for (std::size_t m = 0; m < g.energy_size(); ++m) {
      const double e = std::exp(-g.eps()[m] / T) * g.energy_weights()[m];
      m0 += e;
      m1 += e * g.eps()[m];
    }
    const double ex0 = std::tgamma(0.5 * d + 1.0) * std::pow(T, 0.5 * d);
    const double ex1 = ex0 * 0.5 * d * T;
    energy = std::max({energy, std::fabs(m0 / ex0 - 1.0), std::fabs(m1 / ex1 - 1.0)});
  }
  return 3.0 * (tail_mass + alias) + 3.0 * (tail_second + alias_second) + 2.0 * energy;
}

/// Temperature envelope of a relaxation run starting from `mac`: every
/// eigenvalue of the corrected tensor and every T_theta along the run stays
/// in the convex hull of the initial values and T_delta.
inline double run_truncation_bound(const Grid& g, const MacroState& mac, double A, double t_end) {
  const SymEigen3 es = jacobi_eigen(mac.Theta);
  const double var_lo = std::min(es.values[0], mac.T_delta);
  const double var_hi = std::max(es.values[2], mac.T_delta);
  const double t_lo = std::min(mac.T_I, mac.T_delta);
  const double t_hi = std::max(mac.T_I, mac.T_delta);
  const double u = std::max({std::fabs(mac.U[0]), std::fabs(mac.U[1]), std::fabs(mac.U[2])});
  return (A * t_end + 1.0) * grid_moment_defect(g, var_lo, var_hi, u, t_lo, t_hi);
}

namespace detail {

struct Conserved {
  double mass = 0.0;
  Vec3 momentum{};
  double energy = 0.0;
  double E_tr = 0.0;
  double E_I = 0.0;
};

inline Conserved conserved_of(const MacroState& m) {
  return {m.rho, {m.rho * m.U[0], m.rho * m.U[1], m.rho * m.U[2]}, m.total_energy(), m.E_tr, m.E_I};
}

inline void fill_drifts(TrajectorySample& s, const Conserved& now, const Conserved& ref,
                        double momentum_scale) {
  s.drift_mass = std::fabs(now.mass - ref.mass) / ref.mass;
  double dm = 0.0;
  for (int i = 0; i < 3; ++i) dm = std::max(dm, std::fabs(now.momentum[i] - ref.momentum[i]));
  s.drift_momentum = dm / momentum_scale;
  s.drift_energy = std::fabs(now.energy - ref.energy) / ref.energy;
  s.drift_E_tr = std::fabs(now.E_tr - ref.E_tr) / ref.E_tr;
  s.drift_E_I = std::fabs(now.E_I - ref.E_I) / ref.E_I;
}

inline void record_step_H(Trajectory& tr, double H_new, double tol) {
  const double inc = H_new - tr.step_H.back();
  tr.max_H_increase = std::max(tr.max_H_increase, inc);
  if (inc > tol) {
    ++tr.monotonicity_violations;
    if (tr.theorem_regime) tr.h_monotone = false;
  }
  tr.step_H.push_back(H_new);
}

}  // namespace detail

/// Integrate from f0 to t_end. H is recorded after every step and checked
/// for monotonicity (flagged, not thrown); samples every `sample_every` steps
/// and at the end.
inline Trajectory run_homogeneous(const Distribution& f0, const RunConfig& cfg) {
  cfg.validate();
  require_grid_delta(f0.grid(), cfg.params.delta);
  Trajectory tr;
  tr.theorem_regime = cfg.params.theorem_regime();

  Distribution f = f0;
  RelaxationTarget tgt = relaxation_target(f, cfg.params, cfg.conservative_projection);
  const detail::Conserved ref = detail::conserved_of(tgt.mac);
  const double momentum_scale = ref.mass * std::sqrt(tgt.mac.T_delta);
  tr.collision_frequency = tgt.A;
  tr.truncation_bound = run_truncation_bound(f.grid(), tgt.mac, tgt.A, cfg.t_end);

  auto sample = [&](double t, double H) {
    TrajectorySample s;
    s.t = t;
    s.mac = tgt.mac;
    s.H = H;
    s.D = entropy_production(f, tgt.gaussian).D;
    s.R_closed = remainder_closed_form(tgt.mac, cfg.params).R;
    detail::fill_drifts(s, detail::conserved_of(tgt.mac), ref, momentum_scale);
    tr.samples.push_back(s);
  };

  double H = boltzmann_entropy(f);
  tr.step_H.push_back(H);
  sample(0.0, H);

  const int n = cfg.steps();
  for (int step = 1; step <= n; ++step) {
    const double t_prev = (step - 1) * cfg.dt;
    const double dt = std::min(cfg.dt, cfg.t_end - t_prev);
    if (tgt.projection_failed) ++tr.projection_failures;
    f = step_with_target(f, tgt, cfg, dt);
    tgt = relaxation_target(f, cfg.params, cfg.conservative_projection);
    H = boltzmann_entropy(f);
    detail::record_step_H(tr, H, cfg.h_tolerance);
    if (step % cfg.sample_every == 0 || step == n) sample(t_prev + dt, H);
  }
  if (tr.projection_failures > 0)
    tr.warnings.push_back("projection did not converge on " + std::to_string(tr.projection_failures) +
                          " steps; uncorrected Gaussian used");
  if (tr.monotonicity_violations > 0)
    tr.warnings.push_back("H increased beyond tolerance on " +
                          std::to_string(tr.monotonicity_violations) + " steps");
  tr.final_state = std::move(f);
  return tr;
}

// ---------------------------------------------------------------------------
// Periodic slab

using SlabField = std::vector<Distribution>;

/// First-order upwind transport in x along v1, periodic boundary:
/// f_j <- (1 - c) f_j + c f_{j -/+ 1} with c = |v1| dt / dx.
inline void step_transport_1d(SlabField& field, double dx, double dt) {
  if (field.empty()) return;
  const Grid& g = field.front().grid();
  for (const auto& cell : field) require_same_grid(field.front(), cell);
  const auto axis = g.axis();
  double vmax = 0.0;
  for (double a : axis) vmax = std::max(vmax, std::fabs(a));
  if (vmax * dt / dx > 1.0 + 1e-12)
    throw parameter_error("CFL violated: max|v1| dt/dx = " + std::to_string(vmax * dt / dx));

  const std::size_t J = field.size();
  const SlabField old = field;
  const std::size_t n_axis = axis.size();
  const std::size_t plane = g.size() / n_axis;  // nodes sharing one v1 value
  for (std::size_t j = 0; j < J; ++j) {
    const std::size_t left = (j + J - 1) % J;
    const std::size_t right = (j + 1) % J;
    double* out = field[j].values().data();
    const double* here = old[j].values().data();
    for (std::size_t i1 = 0; i1 < n_axis; ++i1) {
      const double v1 = axis[i1];
      const double c = std::fabs(v1) * dt / dx;
      const double* up = old[v1 > 0.0 ? left : right].values().data();
      const std::size_t lo = i1 * plane;
      for (std::size_t q = lo; q < lo + plane; ++q) out[q] = (1.0 - c) * here[q] + c * up[q];
    }
  }
}

/// Sum of dx * f_j: the spatially integrated distribution.
inline Distribution integrate_over_x(const SlabField& field, double dx) {
  Distribution total(field.front().grid());
  for (const auto& cell : field)
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += dx * cell[i];
  return total;
}

/// Strang splitting: half transport, relaxation in every cell, half transport.
/// Totals (mass, momentum, energy, H) are spatial integrals over the slab.
inline Trajectory run_slab(const SlabField& field0, const RunConfig& cfg) {
  cfg.validate();
  if (!cfg.slab) throw parameter_error("run_slab needs a slab configuration");
  if (static_cast<int>(field0.size()) != cfg.slab->x_cells)
    throw parameter_error("slab field has " + std::to_string(field0.size()) + " cells, config says " +
                          std::to_string(cfg.slab->x_cells));
  const double dx = cfg.slab->x_length / cfg.slab->x_cells;
  const std::size_t J = field0.size();

  Trajectory tr;
  tr.theorem_regime = cfg.params.theorem_regime();
  SlabField field = field0;

  auto total_H = [&]() {
    std::vector<double> h(J);
    parallel_for(J, [&](std::size_t j) { h[j] = boltzmann_entropy(field[j]); });
    double s = 0.0;
    for (double x : h) s += dx * x;
    return s;
  };

  const MacroState mac0 = compute_macro(integrate_over_x(field, dx));
  const detail::Conserved ref = detail::conserved_of(mac0);
  const double momentum_scale = ref.mass * std::sqrt(mac0.T_delta);

  auto sample = [&](double t, double H) {
    TrajectorySample s;
    s.t = t;
    s.H = H;
    s.mac = compute_macro(integrate_over_x(field, dx));
    std::vector<double> d(J), r(J), etr(J), ei(J);
    parallel_for(J, [&](std::size_t j) {
      const RelaxationTarget tg = relaxation_target(field[j], cfg.params, cfg.conservative_projection);
      d[j] = entropy_production(field[j], tg.gaussian).D;
      r[j] = remainder_closed_form(tg.mac, cfg.params).R;
      etr[j] = tg.mac.E_tr;
      ei[j] = tg.mac.E_I;
    });
    detail::Conserved now = detail::conserved_of(s.mac);
    for (std::size_t j = 0; j < J; ++j) {
      s.D += dx * d[j];
      s.R_closed += dx * r[j];
    }
    detail::fill_drifts(s, now, ref, momentum_scale);
    tr.samples.push_back(s);
  };

  double H = total_H();
  tr.step_H.push_back(H);
  {
    double amax = 0.0;
    double bound = 0.0;
    for (const auto& cell : field) {
      const MacroState m = compute_macro(cell);
      const double A = collision_frequency(m, cfg.params);
      amax = std::max(amax, A);
      bound = std::max(bound, run_truncation_bound(cell.grid(), m, A, cfg.t_end));
    }
    tr.collision_frequency = amax;
    tr.truncation_bound = bound;
  }
  sample(0.0, H);

  const int n = cfg.steps();
  std::vector<char> failed(J);
  for (int step = 1; step <= n; ++step) {
    const double t_prev = (step - 1) * cfg.dt;
    const double dt = std::min(cfg.dt, cfg.t_end - t_prev);
    step_transport_1d(field, dx, 0.5 * dt);
    parallel_for(J, [&](std::size_t j) {
      const RelaxationTarget tg = relaxation_target(field[j], cfg.params, cfg.conservative_projection);
      failed[j] = tg.projection_failed;
      field[j] = step_with_target(field[j], tg, cfg, dt);
    });
    for (char c : failed) tr.projection_failures += c ? 1 : 0;
    step_transport_1d(field, dx, 0.5 * dt);
    H = total_H();
    detail::record_step_H(tr, H, cfg.h_tolerance);
    if (step % cfg.sample_every == 0 || step == n) sample(t_prev + dt, H);
  }
  if (tr.projection_failures > 0)
    tr.warnings.push_back("projection did not converge on " + std::to_string(tr.projection_failures) +
                          " cell-steps; uncorrected Gaussian used");
  if (tr.monotonicity_violations > 0)
    tr.warnings.push_back("total H increased beyond tolerance on " +
                          std::to_string(tr.monotonicity_violations) + " steps");
  tr.final_field = std::move(field);
  return tr;
}

}  // namespace polykin
