#pragma once

/// JSON run configurations: parameters, grid (explicit or sized from the
/// initial state), time stepping, initial data, optional slab.
///
///   {
///     "params": {"nu": 0.5, "theta": 0.5, "delta": 2},
///     "time_unit": "collision",          // t_end, dt in units of 1/A(f0)
///     "t_end": 5, "dt": 0.01,
///     "scheme": "exponential",
///     "conservative_projection": true,
///     "sample_every": 10,
///     "initial": {"kind": "ellipsoidal", "rho": 1, "U": [0,0,0],
///                 "sigma": [[0.8,0.1,0],[0.1,1,0],[0,0,1.2]], "T_I": 1.2},
///     "slab": {"x_cells": 64, "x_length": 1, "cfl": 0.9,
///              "initial": {"kind": "temperature_wave", "rho": 1, "T0": 1, "amplitude": 0.2}}
///   }
///
/// Initial kinds: maxwellian {rho, U, T}, ellipsoidal {rho, U, sigma, T_I},
/// bimodal {rho, u, T}, random {} (seeded macrostate), snapshot {path}.
/// Any kind except snapshot accepts "perturbation": amplitude of seeded
/// multiplicative noise.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "polykin/error.hpp"
#include "polykin/gaussian.hpp"
#include "polykin/initial.hpp"
#include "polykin/moments.hpp"
#include "polykin/params.hpp"
#include "polykin/quadrature.hpp"
#include "polykin/relaxation.hpp"
#include "polykin/sampler.hpp"
#include "polykin/snapshot.hpp"
#include "polykin/sweep.hpp"

namespace polykin {

struct GridPreset {
  int v_points = 32;
  int e_points = 32;
};

inline GridPreset grid_preset(const std::string& name) {
  if (name == "coarse") return {16, 16};
  if (name == "default") return {32, 32};
  if (name == "fine") return {48, 32};
  throw parameter_error("unknown grid preset '" + name + "' (coarse, default, fine)");
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw parse_error("cannot open config '" + path + "'");
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw parse_error("config '" + path + "': " + e.what());
  }
}

namespace detail {

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

inline Vec3 vec3_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw parse_error("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline Mat3 mat3_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw parse_error("expected a 3x3 matrix");
  Mat3 m{};
  for (int i = 0; i < 3; ++i) m[i] = vec3_from(j[i]);
  return m;
}

}  // namespace detail

/// A homogeneous initial state: the macrostate it is built from (used to
/// size the grid) plus how to realise it on a grid.
struct InitialSpec {
  std::string kind = "maxwellian";
  double rho = 1.0;
  Vec3 U{};
  Mat3 sigma = identity3();
  double T_I = 1.0;
  double bimodal_u = 1.0;
  double perturbation = 0.0;
  std::string path;

  /// Largest velocity temperature, largest internal temperature and drift
  /// a run from this state can reach.
  struct Envelope {
    double t_max, t_int_max, u_max;
  };

  Envelope envelope(double delta) const {
    const MacroState m = MacroState::from_fields(rho, U, sigma, T_I, delta);
    const SymEigen3 es = jacobi_eigen(m.Theta);
    const double u = std::max({std::fabs(U[0]), std::fabs(U[1]), std::fabs(U[2])});
    // bimodal: two Maxwellians at temperature T_I drifting at +-u along v1
    if (kind == "bimodal") return {std::max(T_I, m.T_delta), std::max(T_I, m.T_delta), bimodal_u};
    const double scale = 1.0 + perturbation;
    return {scale * std::max(es.values[2], m.T_delta), scale * std::max(T_I, m.T_delta), u};
  }
};

inline InitialSpec parse_initial(const nlohmann::json& j, double delta, std::uint64_t seed) {
  InitialSpec s;
  s.kind = detail::get_or<std::string>(j, "kind", "maxwellian");
  s.perturbation = detail::get_or(j, "perturbation", 0.0);
  if (s.kind == "maxwellian") {
    s.rho = detail::get_or(j, "rho", 1.0);
    if (j.contains("U")) s.U = detail::vec3_from(j.at("U"));
    const double T = detail::get_or(j, "T", 1.0);
    s.sigma = diag3({T, T, T});
    s.T_I = T;
  } else if (s.kind == "ellipsoidal") {
    s.rho = detail::get_or(j, "rho", 1.0);
    if (j.contains("U")) s.U = detail::vec3_from(j.at("U"));
    s.sigma = detail::mat3_from(j.at("sigma"));
    s.T_I = j.at("T_I").get<double>();
  } else if (s.kind == "bimodal") {
    s.rho = detail::get_or(j, "rho", 1.0);
    s.bimodal_u = detail::get_or(j, "u", 1.0);
    const double T = detail::get_or(j, "T", 1.0);
    s.T_I = T;
    s.sigma = diag3({T + s.bimodal_u * s.bimodal_u, T, T});
  } else if (s.kind == "random") {
    CounterRng rng(seed, 0);
    const MacroState m = sample_macrostate(rng, delta);
    s.kind = "ellipsoidal";
    s.rho = m.rho;
    s.sigma = m.Theta;
    s.T_I = m.T_I;
  } else if (s.kind == "snapshot") {
    s.path = j.at("path").get<std::string>();
  } else {
    throw parameter_error("unknown initial kind '" + s.kind + "'");
  }
  if (!(s.perturbation >= 0.0 && s.perturbation < 1.0))
    throw parameter_error("perturbation must lie in [0, 1)");
  return s;
}

inline Distribution realise(const InitialSpec& s, double delta, const Grid& grid, std::uint64_t seed) {
  Distribution f(grid);
  if (s.kind == "maxwellian") {
    f = maxwellian(s.rho, s.U, s.sigma[0][0], delta, grid);
  } else if (s.kind == "ellipsoidal") {
    f = ellipsoidal(s.rho, s.U, s.sigma, s.T_I, grid);
  } else if (s.kind == "bimodal") {
    f = bimodal(s.rho, s.bimodal_u, s.T_I, delta, grid);
  } else {
    throw parameter_error("initial kind '" + s.kind + "' cannot be realised on a grid");
  }
  if (s.perturbation > 0.0) f = perturbed(f, s.perturbation, seed);
  return f;
}

struct SlabInitial {
  double rho = 1.0;
  double T0 = 1.0;
  double amplitude = 0.2;
  std::string path;  ///< snapshot path; overrides the wave when set
};

/// A fully resolved run: config, initial data, and the raw JSON it came from.
struct LoadedRun {
  RunConfig config;
  std::optional<Distribution> initial;
  std::optional<SlabField> slab_initial;
  nlohmann::json echo;
  std::string time_unit = "absolute";
};

/// Build a run from JSON.  Node counts come from `preset` when set, else from
/// the "grid" object, else 32^3 x 32.  Extents come from "grid" when it gives
/// them, else they are sized from the initial state.
inline LoadedRun load_run(const nlohmann::json& j, std::uint64_t seed, const std::optional<GridPreset>& preset) {
  LoadedRun run;
  run.echo = j;
  RunConfig& cfg = run.config;
  try {
    const auto& pj = j.at("params");
    cfg.params.nu = detail::get_or(pj, "nu", 0.0);
    cfg.params.theta = detail::get_or(pj, "theta", 0.0);
    cfg.params.delta = detail::get_or(pj, "delta", 2.0);
    cfg.params.validate();
    cfg.t_end = j.at("t_end").get<double>();
    cfg.dt = detail::get_or(j, "dt", 0.0);
    cfg.scheme = parse_scheme(detail::get_or<std::string>(j, "scheme", "exponential"));
    cfg.conservative_projection = detail::get_or(j, "conservative_projection", true);
    cfg.sample_every = detail::get_or(j, "sample_every", 1);
    run.time_unit = detail::get_or<std::string>(j, "time_unit", "absolute");
    if (run.time_unit != "absolute" && run.time_unit != "collision")
      throw parameter_error("time_unit must be 'absolute' or 'collision'");
    const double delta = cfg.params.delta;
    GridPreset pts;
    std::optional<GridSpec> explicit_grid;
    if (j.contains("grid")) {
      const auto& gj = j.at("grid");
      pts.v_points = detail::get_or(gj, "v_points_per_axis", pts.v_points);
      pts.e_points = detail::get_or(gj, "energy_points", pts.e_points);
      if (preset) pts = *preset;
      if (gj.contains("v_extent") || gj.contains("energy_variable_max")) {
        GridSpec gs;
        gs.v_extent = gj.at("v_extent").get<double>();
        gs.v_points_per_axis = pts.v_points;
        gs.energy_variable_max = gj.at("energy_variable_max").get<double>();
        gs.energy_points = pts.e_points;
        gs.delta = delta;
        explicit_grid = gs;
      }
    } else if (preset) {
      pts = *preset;
    }

    if (j.contains("slab")) {
      const auto& sj = j.at("slab");
      SlabConfig slab;
      slab.x_cells = detail::get_or(sj, "x_cells", 64);
      slab.x_length = detail::get_or(sj, "x_length", 1.0);
      cfg.slab = slab;
      cfg.h_tolerance = detail::get_or(j, "h_tolerance", 1e-8);
      SlabInitial si;
      if (sj.contains("initial")) {
        const auto& ij = sj.at("initial");
        const std::string kind = detail::get_or<std::string>(ij, "kind", "temperature_wave");
        if (kind == "snapshot") {
          si.path = ij.at("path").get<std::string>();
        } else if (kind == "temperature_wave") {
          si.rho = detail::get_or(ij, "rho", 1.0);
          si.T0 = detail::get_or(ij, "T0", 1.0);
          si.amplitude = detail::get_or(ij, "amplitude", 0.2);
        } else {
          throw parameter_error("unknown slab initial kind '" + kind + "'");
        }
      }
      if (!si.path.empty()) {
        Snapshot snap = load_snapshot(si.path);
        require_grid_delta(Grid(snap.spec), delta);
        if (static_cast<int>(snap.cells.size()) != slab.x_cells)
          throw parameter_error("slab snapshot cell count does not match x_cells");
        cfg.grid = snap.spec;
        run.slab_initial = std::move(snap.cells);
      } else {
        const double t_hi = si.T0 * (1.0 + std::fabs(si.amplitude));
        cfg.grid = explicit_grid.value_or(
            GridSpec::for_temperature(t_hi, t_hi, 0.0, delta, pts.v_points, pts.e_points));
        run.slab_initial = temperature_wave(slab.x_cells, si.rho, si.T0, si.amplitude, delta, Grid(cfg.grid));
      }
      const double dx = slab.x_length / slab.x_cells;
      const double vmax = Grid(cfg.grid).axis().back();
      if (cfg.dt <= 0.0) cfg.dt = detail::get_or(sj, "cfl", 0.9) * dx / vmax;
    } else {
      cfg.h_tolerance = detail::get_or(j, "h_tolerance", 1e-10);
      const InitialSpec init = parse_initial(j.value("initial", nlohmann::json::object()), delta, seed);
      if (init.kind == "snapshot") {
        Snapshot snap = load_snapshot(init.path);
        if (snap.cells.size() != 1) throw parameter_error("homogeneous run needs a single-cell snapshot");
        require_grid_delta(Grid(snap.spec), delta);
        cfg.grid = snap.spec;
        run.initial = std::move(snap.cells.front());
      } else {
        const auto env = init.envelope(delta);
        cfg.grid = explicit_grid.value_or(GridSpec::for_temperature(env.t_max, env.t_int_max, env.u_max, delta,
                                                                    pts.v_points, pts.e_points));
        run.initial = realise(init, delta, Grid(cfg.grid), seed);
      }
    }
    if (!(cfg.dt > 0.0)) throw parameter_error("dt must be given and positive");

    if (run.time_unit == "collision") {
      double A = 0.0;
      if (run.initial) {
        A = collision_frequency(compute_macro(*run.initial), cfg.params);
      } else {
        for (const auto& cell : *run.slab_initial)
          A = std::max(A, collision_frequency(compute_macro(cell), cfg.params));
      }
      cfg.t_end /= A;
      if (!cfg.slab || j.contains("dt")) cfg.dt /= A;
    }
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("config: ") + e.what());
  }
  cfg.validate();
  return run;
}

inline SweepConfig load_sweep(const nlohmann::json& j) {
  SweepConfig s;
  try {
    s.seed = detail::get_or<std::uint64_t>(j, "seed", s.seed);
    s.ensemble = detail::get_or<std::size_t>(j, "ensemble", s.ensemble);
    if (j.contains("nu")) s.nu = j.at("nu").get<std::vector<double>>();
    if (j.contains("theta")) s.theta = j.at("theta").get<std::vector<double>>();
    if (j.contains("delta")) s.delta = j.at("delta").get<std::vector<double>>();
    s.probe_negative_nu = detail::get_or(j, "probe_negative_nu", false);
    if (j.contains("probe_nu")) s.probe_nu = j.at("probe_nu").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("sweep config: ") + e.what());
  }
  s.validate();
  return s;
}

}  // namespace polykin
