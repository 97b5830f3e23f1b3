#pragma once

/// Entropy, entropy production and its decomposition into the relative
/// part int (M - f)(ln M - ln f) and the remainder R_{nu,theta}; closed-form
/// remainder, the F_theta bound, the convexity curve and the pointwise
/// inequality used for weak compactness.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "polykin/error.hpp"
#include "polykin/gaussian.hpp"
#include "polykin/moments.hpp"
#include "polykin/params.hpp"
#include "polykin/quadrature.hpp"

namespace polykin {

/// Values below this are treated as zero inside logarithms.
inline constexpr double kLogFloor = 1e-300;
/// Absolute tolerance for assertions on pure closed-form arithmetic.
inline constexpr double kClosedFormTolerance = 1e-12;

inline double floored_log(double x) { return std::log(std::fmax(x, kLogFloor)); }

/// H = int f ln f, with x ln x := 0 below the floor.
inline double boltzmann_entropy(const Distribution& f) {
  const Grid& g = f.grid();
  const auto ne = g.energy_size();
  const auto u = g.energy_weights();
  const double* p = f.values().data();
  double total = 0.0;
  for (std::size_t k = 0; k < g.velocity_size(); ++k) {
    double inner = 0.0;
    for (std::size_t m = 0; m < ne; ++m) {
      const double x = p[k * ne + m];
      if (x < 0.0) throw parameter_error("entropy: negative distribution value");
      if (x >= kLogFloor) inner += x * std::log(x) * u[m];
    }
    total += inner;
  }
  return total * g.velocity_weight();
}

struct EntropyProduction {
  double D = 0.0;              ///< -int (M - f) ln f
  double relative_part = 0.0;  ///< int (M - f)(ln M - ln f) >= 0
};

/// Nodes where both f and M are below the log floor contribute nothing;
/// where only one of them is, its logarithm is taken at the floor value.
inline EntropyProduction entropy_production(const Distribution& f, const Distribution& mg) {
  require_same_grid(f, mg);
  const Grid& g = f.grid();
  const auto ne = g.energy_size();
  const auto u = g.energy_weights();
  const double* pf = f.values().data();
  const double* pm = mg.values().data();
  double d = 0.0;
  double rel = 0.0;
  for (std::size_t k = 0; k < g.velocity_size(); ++k) {
    double di = 0.0;
    double ri = 0.0;
    for (std::size_t m = 0; m < ne; ++m) {
      const double fv = pf[k * ne + m];
      const double mv = pm[k * ne + m];
      if (fv < kLogFloor && mv < kLogFloor) continue;
      const double lf = floored_log(fv);
      const double lm = floored_log(mv);
      di += -(mv - fv) * lf * u[m];
      ri += (mv - fv) * (lm - lf) * u[m];
    }
    d += di;
    rel += ri;
  }
  const double w = g.velocity_weight();
  return {d * w, rel * w};
}

/// int (M - f)( (v-U)^T T^{-1} (v-U) / 2 + eps / T_theta ) by direct quadrature.
inline double remainder_quadrature(const Distribution& f, const Distribution& mg,
                                   const MacroState& mac, const Params& p) {
  require_same_grid(f, mg);
  const Grid& g = f.grid();
  const CorrectedTensor ct = corrected_tensor(mac, p);
  const double t_theta = relaxation_temperature(mac, p);
  const auto ne = g.energy_size();
  const auto u = g.energy_weights();
  const auto eps = g.eps();
  std::vector<double> energy_term(ne);
  for (std::size_t m = 0; m < ne; ++m) energy_term[m] = eps[m] / t_theta;
  const double* pf = f.values().data();
  const double* pm = mg.values().data();
  double total = 0.0;
  for (std::size_t k = 0; k < g.velocity_size(); ++k) {
    const Vec3 v = g.velocity(k);
    const Vec3 c{v[0] - mac.U[0], v[1] - mac.U[1], v[2] - mac.U[2]};
    const double q = 0.5 * quadratic_form(ct.inverse, c);
    double inner = 0.0;
    for (std::size_t m = 0; m < ne; ++m)
      inner += (pm[k * ne + m] - pf[k * ne + m]) * (q + energy_term[m]) * u[m];
    total += inner;
  }
  return total * g.velocity_weight();
}

struct ClosedFormRemainder {
  double R = std::numeric_limits<double>::quiet_NaN();
  double F_theta = std::numeric_limits<double>::quiet_NaN();
  Vec3 A{};
  Vec3 theta_eig{};
  bool defined = false;  ///< false when some A_i <= 0 (possible only for nu < 0)
};

/// R = rho/2 {3 + delta - (F_theta + delta T_I / T_theta)},  F_theta = sum Theta_i / A_i.
inline ClosedFormRemainder remainder_closed_form(const MacroState& mac, const Params& p) {
  ClosedFormRemainder out;
  const CorrectedTensor ct = assemble_corrected_tensor(mac, p);
  out.A = ct.eig;
  out.theta_eig = ct.theta_eig;
  if (!ct.positive_definite) return out;
  const double t_theta = relaxation_temperature(mac, p);
  out.F_theta = ct.theta_eig[0] / ct.eig[0] + ct.theta_eig[1] / ct.eig[1] + ct.theta_eig[2] / ct.eig[2];
  out.R = 0.5 * mac.rho * (3.0 + mac.delta - (out.F_theta + mac.delta * mac.T_I / t_theta));
  out.defined = true;
  return out;
}

struct FThetaBound {
  double F_theta = 0.0;
  double bound = 0.0;  ///< 3 T_tr / ((1-theta) T_tr + theta T_delta)
  bool ok = false;
  bool asserted = false;  ///< bound only claimed in the theorem regime
};

inline FThetaBound f_theta_bound(const MacroState& mac, const Params& p) {
  FThetaBound out;
  const ClosedFormRemainder cf = remainder_closed_form(mac, p);
  out.F_theta = cf.F_theta;
  out.bound = 3.0 * mac.T_tr / ((1.0 - p.theta) * mac.T_tr + p.theta * mac.T_delta);
  out.asserted = p.theorem_regime();
  out.ok = cf.defined && out.F_theta <= out.bound + kClosedFormTolerance;
  return out;
}

/// F(t) = 3A/((1-t)A + tK) + delta B/((1-t)B + tK),  K = (3A + delta B)/(3 + delta).
inline double convexity_function(double A, double B, double delta, double t) {
  const double K = (3.0 * A + delta * B) / (3.0 + delta);
  // A ratio x / ((1-t)x + tK) is 1 at t = 0 for every x, including the x -> 0 limit.
  auto ratio = [&](double x) {
    if (t == 0.0) return 1.0;
    if (x == 0.0) return 0.0;
    return x / ((1.0 - t) * x + t * K);
  };
  return 3.0 * ratio(A) + delta * ratio(B);
}

struct ConvexityCurve {
  double K = 0.0;
  std::vector<double> t;
  std::vector<double> F;
  double max_value = -std::numeric_limits<double>::infinity();
  double min_second_difference = std::numeric_limits<double>::infinity();
  bool bounded = false;  ///< F <= 3 + delta + 1e-12 everywhere
  bool convex = false;   ///< second differences >= -1e-10
};

/// Evaluate F on sorted nodes in [0, 1]. Second differences are the
/// three-point divided differences rescaled to the local half-spacing, so
/// on a uniform grid they equal F(t-h) - 2F(t) + F(t+h).
inline ConvexityCurve convexity_curve(double A, double B, double delta,
                                      std::span<const double> t_nodes) {
  if (!(A >= 0.0 && B >= 0.0)) throw parameter_error("convexity curve: A and B must be >= 0");
  if (A == 0.0 && B == 0.0) throw parameter_error("convexity curve: A = B = 0 is degenerate");
  if (!(delta > 0.0)) throw parameter_error("convexity curve: delta must be positive");
  ConvexityCurve c;
  c.K = (3.0 * A + delta * B) / (3.0 + delta);
  c.t.assign(t_nodes.begin(), t_nodes.end());
  for (std::size_t i = 0; i < c.t.size(); ++i) {
    if (c.t[i] < 0.0 || c.t[i] > 1.0) throw parameter_error("convexity curve: t outside [0, 1]");
    if (i > 0 && !(c.t[i] > c.t[i - 1])) throw parameter_error("convexity curve: t must increase");
    c.F.push_back(convexity_function(A, B, delta, c.t[i]));
    c.max_value = std::max(c.max_value, c.F.back());
  }
  for (std::size_t i = 1; i + 1 < c.t.size(); ++i) {
    const double h0 = c.t[i] - c.t[i - 1];
    const double h1 = c.t[i + 1] - c.t[i];
    const double dd = 2.0 * ((c.F[i + 1] - c.F[i]) / h1 - (c.F[i] - c.F[i - 1]) / h0) / (h0 + h1);
    const double half = 0.5 * (h0 + h1);
    c.min_second_difference = std::min(c.min_second_difference, dd * half * half);
  }
  c.bounded = c.max_value <= 3.0 + delta + kClosedFormTolerance;
  c.convex = c.t.size() < 3 || c.min_second_difference >= -1e-10;
  return c;
}

inline std::vector<double> uniform_nodes(int n) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = static_cast<double>(i) / (n - 1);
  t.back() = 1.0;
  return t;
}

struct TheoremCheck {
  bool regime = false;      ///< 0 <= nu < 1: positivity is asserted
  double bound = 0.0;       ///< 3 + delta
  double lhs = 0.0;         ///< F_theta + delta T_I / T_theta
  double R_closed = 0.0;
  bool R_defined = false;
  double F_theta = 0.0;
  double F_bound = 0.0;
  double chain_value = 0.0;  ///< F_bound + delta T_I / T_theta = F(t = theta) of the curve
  bool chain_ok = false;     ///< lhs <= chain_value <= 3 + delta
  bool ok = false;
};

/// Check F_theta + delta T_I/T_theta <= 3 + delta together with the chain
/// F_theta <= F_bound and F_bound + delta T_I/T_theta = F(theta) <= 3 + delta,
/// where F is the convexity curve with A = T_tr, B = T_I (so K = T_delta).
inline TheoremCheck theorem_check(const MacroState& mac, const Params& p) {
  TheoremCheck tc;
  tc.regime = p.theorem_regime();
  tc.bound = 3.0 + mac.delta;
  const ClosedFormRemainder cf = remainder_closed_form(mac, p);
  tc.R_defined = cf.defined;
  if (!cf.defined) {
    tc.R_closed = cf.R;
    tc.lhs = std::numeric_limits<double>::quiet_NaN();
    return tc;
  }
  const double t_theta = relaxation_temperature(mac, p);
  const double internal_ratio = mac.delta * mac.T_I / t_theta;
  tc.R_closed = cf.R;
  tc.F_theta = cf.F_theta;
  tc.lhs = cf.F_theta + internal_ratio;
  tc.F_bound = 3.0 * mac.T_tr / ((1.0 - p.theta) * mac.T_tr + p.theta * mac.T_delta);
  tc.chain_value = convexity_function(mac.T_tr, mac.T_I, mac.delta, p.theta);
  tc.chain_ok = tc.F_theta <= tc.F_bound + kClosedFormTolerance &&
                tc.chain_value <= tc.bound + kClosedFormTolerance;
  tc.ok = tc.lhs <= tc.bound + kClosedFormTolerance && tc.R_closed >= -kClosedFormTolerance;
  return tc;
}

/// M - M_cut f - (M - f)(ln M - ln f)/ln M_cut for one node. Never positive
/// in exact arithmetic.
inline double compactness_gap(double mval, double fval, double m_cut) {
  return mval - m_cut * fval - (mval - fval) * (std::log(mval) - std::log(fval)) / std::log(m_cut);
}

struct CompactnessResult {
  double max_violation = -std::numeric_limits<double>::infinity();  ///< max (LHS - RHS)
  double max_scaled_violation = -std::numeric_limits<double>::infinity();  ///< / max(M, M_cut f)
  std::size_t evaluated = 0;
};

inline CompactnessResult compactness_pointwise(std::span<const double> f, std::span<const double> mg,
                                               double m_cut) {
  if (!(m_cut > 1.0)) throw parameter_error("compactness: M_cut must exceed 1");
  if (f.size() != mg.size()) throw parameter_error("shape mismatch in compactness check");
  CompactnessResult r;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!(f[i] > kLogFloor && mg[i] > kLogFloor)) continue;
    const double gap = compactness_gap(mg[i], f[i], m_cut);
    const double scale = std::max(mg[i], m_cut * f[i]);
    r.max_violation = std::max(r.max_violation, gap);
    r.max_scaled_violation = std::max(r.max_scaled_violation, gap / scale);
    ++r.evaluated;
  }
  return r;
}

inline CompactnessResult compactness_pointwise(const Distribution& f, const Distribution& mg,
                                               double m_cut) {
  require_same_grid(f, mg);
  return compactness_pointwise(f.values(), mg.values(), m_cut);
}

/// Full decomposition report for one distribution.
struct EntropyReport {
  Params params;
  MacroState macro;
  double H = 0.0;
  double D = 0.0;
  double relative_part = 0.0;
  double R_quad = std::numeric_limits<double>::quiet_NaN();
  double R_closed = std::numeric_limits<double>::quiet_NaN();
  double F_theta = std::numeric_limits<double>::quiet_NaN();
  double F_bound = std::numeric_limits<double>::quiet_NaN();
  double theorem_lhs = std::numeric_limits<double>::quiet_NaN();
  bool theorem_ok = false;
  bool regime = false;
  bool tensor_defined = false;
  /// D - relative_part - R_quad; bounded by the quadrature mass defect of M.
  double decomposition_residual = std::numeric_limits<double>::quiet_NaN();
  /// |int M - rho| / rho on this grid, the discretization scale for R_quad.
  double mass_defect = std::numeric_limits<double>::quiet_NaN();
};

inline EntropyReport decompose(const Distribution& f, const Params& p) {
  p.validate();
  EntropyReport rep;
  rep.params = p;
  rep.macro = compute_macro(f);
  rep.regime = p.theorem_regime();
  rep.H = boltzmann_entropy(f);
  const TheoremCheck tc = theorem_check(rep.macro, p);
  rep.tensor_defined = tc.R_defined;
  rep.F_bound = 3.0 * rep.macro.T_tr / ((1.0 - p.theta) * rep.macro.T_tr + p.theta * rep.macro.T_delta);
  if (!tc.R_defined) return rep;
  rep.R_closed = tc.R_closed;
  rep.F_theta = tc.F_theta;
  rep.theorem_lhs = tc.lhs;
  rep.theorem_ok = tc.ok;

  const Distribution mg = build_gaussian(rep.macro, p, f.grid());
  const EntropyProduction ep = entropy_production(f, mg);
  rep.D = ep.D;
  rep.relative_part = ep.relative_part;
  rep.R_quad = remainder_quadrature(f, mg, rep.macro, p);
  rep.decomposition_residual = rep.D - rep.relative_part - rep.R_quad;
  rep.mass_defect = std::fabs(integrate(mg) - rep.macro.rho) / rep.macro.rho;
  return rep;
}

}  // namespace polykin
