#pragma once

/// JSON and CSV emission for macrostates, entropy reports and trajectories.
/// Numbers are printed in shortest round-trip form so reruns are byte-identical.

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "polykin/entropy.hpp"
#include "polykin/moments.hpp"
#include "polykin/params.hpp"
#include "polykin/quadrature.hpp"
#include "polykin/relaxation.hpp"
#include "polykin/snapshot.hpp"

namespace polykin {

using Json = nlohmann::ordered_json;

/// JSON has no NaN; undefined quantities become null.
inline Json json_number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return detail::shortest_repr(x);
}

inline Json to_json(const Vec3& v) { return Json::array({v[0], v[1], v[2]}); }

inline Json to_json(const Mat3& m) {
  Json rows = Json::array();
  for (const auto& r : m) rows.push_back(Json::array({r[0], r[1], r[2]}));
  return rows;
}

inline Json to_json(const Params& p) { return Json{{"nu", p.nu}, {"theta", p.theta}, {"delta", p.delta}}; }

inline Json to_json(const GridSpec& s) {
  return Json{{"v_extent", s.v_extent},
              {"v_points_per_axis", s.v_points_per_axis},
              {"energy_variable_max", s.energy_variable_max},
              {"energy_points", s.energy_points},
              {"delta", s.delta}};
}

inline Json to_json(const MacroState& m) {
  return Json{{"rho", json_number(m.rho)},     {"U", to_json(m.U)},
              {"Theta", to_json(m.Theta)},     {"E_tr", json_number(m.E_tr)},
              {"E_I", json_number(m.E_I)},     {"T_tr", json_number(m.T_tr)},
              {"T_I", json_number(m.T_I)},     {"T_delta", json_number(m.T_delta)},
              {"delta", json_number(m.delta)}};
}

inline Json to_json(const EntropyReport& r) {
  return Json{{"params", to_json(r.params)},
              {"regime", r.regime ? "theorem" : "report-only"},
              {"macro", to_json(r.macro)},
              {"H", json_number(r.H)},
              {"D", json_number(r.D)},
              {"relative_part", json_number(r.relative_part)},
              {"R_quad", json_number(r.R_quad)},
              {"R_closed", json_number(r.R_closed)},
              {"F_theta", json_number(r.F_theta)},
              {"F_bound", json_number(r.F_bound)},
              {"theorem_lhs", json_number(r.theorem_lhs)},
              {"theorem_bound", 3.0 + r.macro.delta},
              {"theorem_ok", r.theorem_ok},
              {"tensor_defined", r.tensor_defined},
              {"decomposition_residual", json_number(r.decomposition_residual)},
              {"mass_defect", json_number(r.mass_defect)}};
}

inline constexpr const char* kReportCsvHeader =
    "seed,nu,theta,delta,R_closed,R_quad,D,relative_part,F_theta,F_bound,theorem_lhs,theorem_ok";

inline std::string report_csv_row(std::uint64_t seed, const EntropyReport& r) {
  std::string s = std::to_string(seed);
  for (double x : {r.params.nu, r.params.theta, r.params.delta, r.R_closed, r.R_quad, r.D, r.relative_part,
                   r.F_theta, r.F_bound, r.theorem_lhs})
    s += ',' + csv_number(x);
  s += r.theorem_ok ? ",1" : ",0";
  return s;
}

inline constexpr const char* kTrajectoryCsvHeader =
    "t,rho,Ux,Uy,Uz,Ttr,TI,Tdelta,H,D,R_closed,drift_mass,drift_energy";

inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  os << kTrajectoryCsvHeader << '\n';
  for (const auto& s : tr.samples) {
    const double row[] = {s.t,       s.mac.rho,  s.mac.U[0],   s.mac.U[1], s.mac.U[2],
                          s.mac.T_tr, s.mac.T_I, s.mac.T_delta, s.H,        s.D,
                          s.R_closed, s.drift_mass, s.drift_energy};
    for (std::size_t i = 0; i < std::size(row); ++i) os << (i ? "," : "") << csv_number(row[i]);
    os << '\n';
  }
}

inline Json trajectory_json(const Trajectory& tr) {
  Json samples = Json::array();
  for (const auto& s : tr.samples)
    samples.push_back(Json{{"t", s.t},
                           {"macro", to_json(s.mac)},
                           {"H", json_number(s.H)},
                           {"D", json_number(s.D)},
                           {"R_closed", json_number(s.R_closed)},
                           {"drift_mass", s.drift_mass},
                           {"drift_momentum", s.drift_momentum},
                           {"drift_energy", s.drift_energy},
                           {"drift_E_tr", s.drift_E_tr},
                           {"drift_E_I", s.drift_E_I}});
  return samples;
}

/// Summary block for the run manifest.
inline Json trajectory_summary(const Trajectory& tr) {
  double dm = 0.0, dp = 0.0, de = 0.0, dtr = 0.0, di = 0.0;
  for (const auto& s : tr.samples) {
    dm = std::max(dm, s.drift_mass);
    dp = std::max(dp, s.drift_momentum);
    de = std::max(de, s.drift_energy);
    dtr = std::max(dtr, s.drift_E_tr);
    di = std::max(di, s.drift_E_I);
  }
  return Json{{"steps", tr.step_H.empty() ? 0 : tr.step_H.size() - 1},
              {"samples", tr.samples.size()},
              {"theorem_regime", tr.theorem_regime},
              {"h_monotone", tr.h_monotone},
              {"max_H_increase", json_number(tr.max_H_increase)},
              {"monotonicity_violations", tr.monotonicity_violations},
              {"collision_frequency", tr.collision_frequency},
              {"truncation_bound", tr.truncation_bound},
              {"max_drift_mass", dm},
              {"max_drift_momentum", dp},
              {"max_drift_energy", de},
              {"max_drift_E_tr", dtr},
              {"max_drift_E_I", di},
              {"projection_failures", tr.projection_failures},
              {"warnings", tr.warnings}};
}

/// Quadrature diagnostics for a grid: node counts, spacing and the
/// Lambda_delta cross-check.
inline Json grid_diagnostics(const Grid& g) {
  return Json{{"spec", to_json(g.spec())},
              {"velocity_spacing", g.spacing()},
              {"nodes", g.size()},
              {"lambda_delta", lambda_delta(g.delta())},
              {"lambda_quadrature", lambda_delta_quadrature(g)},
              {"lambda_relative_mismatch", lambda_cross_check(g)}};
}

}  // namespace polykin
