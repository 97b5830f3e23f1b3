// polykin command-line driver.
//
//   polykin fixture KIND --file FILE         write a snapshot fixture
//   polykin moments SNAPSHOT                 macroscopic fields
//   polykin decompose SNAPSHOT --nu --theta  entropy-production report
//   polykin relax --config RUN.json          homogeneous relaxation
//   polykin slab --config RUN.json           periodic 1D slab
//   polykin sweep [--config SWEEP.json]      closed-form certification sweep
//
// Exit codes: 0 ok, 1 usage/parameter, 2 vacuum, 3 parse, 4 theorem
// violation, 5 numerical failure.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "polykin/config.hpp"
#include "polykin/entropy.hpp"
#include "polykin/error.hpp"
#include "polykin/gaussian.hpp"
#include "polykin/initial.hpp"
#include "polykin/moments.hpp"
#include "polykin/relaxation.hpp"
#include "polykin/report.hpp"
#include "polykin/rng.hpp"
#include "polykin/sampler.hpp"
#include "polykin/snapshot.hpp"
#include "polykin/sweep.hpp"

namespace fs = std::filesystem;
using namespace polykin;

namespace {

constexpr int kTheoremViolation = static_cast<int>(ErrorKind::theorem_violation);

struct Common {
  std::string config;
  std::uint64_t seed = 1;
  std::string preset;
  std::string out;
  std::string format = "csv";
};

/// Everything goes to stdout unless an output directory was given.
void emit(const Common& c, const std::string& name, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  fs::create_directories(c.out);
  const fs::path path = fs::path(c.out) / name;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw parse_error("cannot write '" + path.string() + "'");
  os << text;
}

std::optional<GridPreset> preset_of(const Common& c) {
  if (c.preset.empty()) return std::nullopt;
  return grid_preset(c.preset);
}

std::string macro_csv(const std::vector<MacroState>& ms) {
  std::ostringstream os;
  os << "cell,rho,Ux,Uy,Uz,Ttr,TI,Tdelta,E_tr,E_I\n";
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const MacroState& m = ms[i];
    os << i;
    for (double x : {m.rho, m.U[0], m.U[1], m.U[2], m.T_tr, m.T_I, m.T_delta, m.E_tr, m.E_I})
      os << ',' << csv_number(x);
    os << '\n';
  }
  return os.str();
}

int cmd_moments(const Common& c, const std::string& snapshot_path) {
  const Snapshot snap = load_snapshot(snapshot_path);
  std::vector<MacroState> ms;
  for (const auto& cell : snap.cells) ms.push_back(compute_macro(cell));
  if (c.format == "json") {
    Json j = ms.size() == 1 ? to_json(ms.front()) : Json::array();
    if (ms.size() > 1)
      for (const auto& m : ms) j.push_back(to_json(m));
    emit(c, "moments.json", j.dump(2) + "\n");
  } else {
    emit(c, "moments.csv", macro_csv(ms));
  }
  return 0;
}

int cmd_decompose(const Common& c, const std::string& snapshot_path, double nu, double theta, std::size_t cell) {
  const Snapshot snap = load_snapshot(snapshot_path);
  if (cell >= snap.cells.size()) throw parameter_error("cell index out of range");
  const Params p{nu, theta, snap.spec.delta};
  p.validate();
  if (!p.theorem_regime())
    std::cerr << "report-only: nu < 0 is outside the theorem regime, no assertion is made\n";
  const EntropyReport rep = decompose(snap.cells[cell], p);
  if (c.format == "json") {
    Json j = to_json(rep);
    j["assertion"] = rep.regime ? "asserted" : "none";
    emit(c, "decompose.json", j.dump(2) + "\n");
  } else {
    emit(c, "decompose.csv", std::string(kReportCsvHeader) + "\n" + report_csv_row(c.seed, rep) + "\n");
  }
  if (rep.regime && !rep.theorem_ok) {
    std::cerr << "theorem violation: F_theta + delta T_I / T_theta = " << rep.theorem_lhs << " > "
              << 3.0 + rep.macro.delta << "\n";
    return kTheoremViolation;
  }
  return 0;
}

Json resolved_config(const LoadedRun& run) {
  const RunConfig& cfg = run.config;
  Json j{{"params", to_json(cfg.params)},
         {"grid", to_json(cfg.grid)},
         {"t_end", cfg.t_end},
         {"dt", cfg.dt},
         {"steps", cfg.steps()},
         {"scheme", to_string(cfg.scheme)},
         {"conservative_projection", cfg.conservative_projection},
         {"sample_every", cfg.sample_every},
         {"h_tolerance", cfg.h_tolerance},
         {"time_unit", run.time_unit}};
  if (cfg.slab) j["slab"] = Json{{"x_cells", cfg.slab->x_cells}, {"x_length", cfg.slab->x_length}};
  return j;
}

int cmd_run(const Common& c, bool slab, const std::string& final_path) {
  const LoadedRun run = load_run(read_json_file(c.config), c.seed, preset_of(c));
  if (slab != run.config.slab.has_value())
    throw parameter_error(slab ? "slab command needs a \"slab\" section in the config"
                               : "config has a \"slab\" section; use the slab command");
  const Trajectory tr = slab ? run_slab(*run.slab_initial, run.config) : run_homogeneous(*run.initial, run.config);

  if (c.format == "json") {
    emit(c, "trajectory.json", trajectory_json(tr).dump(2) + "\n");
  } else {
    std::ostringstream os;
    write_trajectory_csv(os, tr);
    emit(c, "trajectory.csv", os.str());
  }
  if (!c.out.empty()) {
    Json manifest{{"tool", "polykin"},
                  {"command", slab ? "slab" : "relax"},
                  {"seed", c.seed},
                  {"rng", kRngName},
                  {"config", run.echo},
                  {"resolved", resolved_config(run)},
                  {"grid_diagnostics", grid_diagnostics(Grid(run.config.grid))},
                  {"summary", trajectory_summary(tr)}};
    emit(c, "manifest.json", manifest.dump(2) + "\n");
  }
  if (!final_path.empty()) {
    if (slab) {
      save_snapshot(final_path, run.config.grid, *tr.final_field);
    } else {
      save_snapshot(final_path, run.config.grid, {*tr.final_state});
    }
  }
  for (const auto& w : tr.warnings) std::cerr << "warning: " << w << "\n";
  if (tr.theorem_regime && !tr.h_monotone) {
    std::cerr << "H-theorem violation: max step increase " << tr.max_H_increase << "\n";
    return kTheoremViolation;
  }
  return 0;
}

std::string sweep_csv(const std::vector<SweepCell>& cells) {
  std::ostringstream os;
  os << "delta,nu,theta,mode,states,undefined,min_R,max_R,max_lhs_excess,max_F_excess,violations\n";
  for (const auto& s : cells) {
    os << (s.delta ? csv_number(*s.delta) : "mixed") << ',' << csv_number(s.nu) << ',' << csv_number(s.theta) << ','
       << (s.asserted ? "asserted" : "report-only") << ',' << s.states << ',' << s.undefined << ','
       << csv_number(s.min_R) << ',' << csv_number(s.max_R) << ',' << csv_number(s.max_lhs_excess) << ','
       << csv_number(s.max_F_excess) << ',' << s.violations << '\n';
  }
  return os.str();
}

int cmd_sweep(const Common& c, std::optional<std::size_t> ensemble, bool probe, bool seed_given) {
  SweepConfig cfg = c.config.empty() ? SweepConfig{} : load_sweep(read_json_file(c.config));
  if (seed_given) cfg.seed = c.seed;
  if (ensemble) cfg.ensemble = *ensemble;
  if (probe) cfg.probe_negative_nu = true;
  cfg.validate();
  const std::vector<SweepCell> cells = run_sweep(cfg);
  if (c.format == "json") {
    Json arr = Json::array();
    for (const auto& s : cells)
      arr.push_back(Json{{"delta", s.delta ? Json(*s.delta) : Json("mixed")},
                         {"nu", s.nu},
                         {"theta", s.theta},
                         {"mode", s.asserted ? "asserted" : "report-only"},
                         {"states", s.states},
                         {"undefined", s.undefined},
                         {"min_R", json_number(s.min_R)},
                         {"max_R", json_number(s.max_R)},
                         {"max_lhs_excess", json_number(s.max_lhs_excess)},
                         {"max_F_excess", json_number(s.max_F_excess)},
                         {"violations", s.violations}});
    emit(c, "sweep.json",
         Json{{"seed", cfg.seed}, {"rng", kRngName}, {"ensemble", cfg.ensemble}, {"cells", arr}}.dump(2) + "\n");
  } else {
    emit(c, "sweep.csv", sweep_csv(cells));
  }
  std::size_t violations = 0;
  for (const auto& s : cells) violations += s.asserted ? s.violations : 0;
  std::cerr << "sweep: " << cells.size() << " cells x " << cfg.ensemble
            << " states, theorem-regime violations: " << violations << "\n";
  return sweep_passed(cells) ? 0 : kTheoremViolation;
}

int cmd_fixture(const Common& c, const std::string& kind, const std::string& path, const std::string& body,
                double delta, int x_cells) {
  const GridPreset pts = preset_of(c).value_or(GridPreset{});
  const SnapshotFormat fmt = body == "csv" ? SnapshotFormat::csv : SnapshotFormat::f64le;
  auto sized = [&](double t_max, double t_int, double u) {
    return GridSpec::for_temperature(t_max, t_int, u, delta, pts.v_points, pts.e_points);
  };
  std::vector<Distribution> cells;
  GridSpec spec;
  if (kind == "maxwellian" || kind == "zero") {
    spec = sized(1.0, 1.0, 0.0);
    Distribution f = maxwellian(1.0, {0.0, 0.0, 0.0}, 1.0, delta, Grid(spec));
    if (kind == "zero") f *= 0.0;
    cells.push_back(std::move(f));
  } else if (kind == "worked") {
    // Theta = diag(1, 2, 3), T_I = 1, rho = 1
    spec = sized(3.0, 1.0, 0.0);
    cells.push_back(ellipsoidal(1.0, {0.0, 0.0, 0.0}, diag3({1.0, 2.0, 3.0}), 1.0, Grid(spec)));
  } else if (kind == "bimodal") {
    spec = sized(1.0, 1.0, 1.0);
    cells.push_back(bimodal(1.0, 1.0, 1.0, delta, Grid(spec)));
  } else if (kind == "random") {
    CounterRng rng(c.seed, 0);
    const MacroState m = sample_macrostate(rng, delta);
    const SymEigen3 es = jacobi_eigen(m.Theta);
    spec = sized(es.values[2], m.T_I, 0.0);
    cells.push_back(ellipsoidal(m.rho, m.U, m.Theta, m.T_I, Grid(spec)));
  } else if (kind == "wave") {
    spec = sized(1.2, 1.2, 0.0);
    cells = temperature_wave(x_cells, 1.0, 1.0, 0.2, delta, Grid(spec));
  } else {
    throw parameter_error("unknown fixture '" + kind + "' (maxwellian, zero, worked, bimodal, random, wave)");
  }
  save_snapshot(path, spec, cells, fmt);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polykin: polyatomic ellipsoidal BGK toolkit"};
  app.require_subcommand(1);
  Common common;

  auto add_common = [&](CLI::App* sub, bool with_config) {
    if (with_config) sub->add_option("--config", common.config, "JSON configuration file");
    sub->add_option("--seed", common.seed, "64-bit seed");
    sub->add_option("--grid-preset", common.preset, "coarse (16^3x16), default (32^3x32), fine (48^3x32)")
        ->check(CLI::IsMember({"coarse", "default", "fine"}));
    sub->add_option("--out", common.out, "output directory (default: stdout)");
    sub->add_option("--format", common.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  };

  std::string snapshot_path;
  auto* moments = app.add_subcommand("moments", "macroscopic fields of a snapshot");
  moments->add_option("snapshot", snapshot_path, "snapshot file")->required();
  add_common(moments, false);

  double nu = 0.0, theta = 0.0;
  std::size_t cell = 0;
  auto* dec = app.add_subcommand("decompose", "entropy-production decomposition of a snapshot");
  dec->add_option("snapshot", snapshot_path, "snapshot file")->required();
  dec->add_option("--nu", nu, "nu in (-1/2, 1)")->required();
  dec->add_option("--theta", theta, "theta in [0, 1]")->required();
  dec->add_option("--cell", cell, "cell index for multi-cell snapshots");
  add_common(dec, false);

  std::string final_path;
  auto* relax = app.add_subcommand("relax", "space-homogeneous relaxation run");
  add_common(relax, true);
  relax->add_option("--final", final_path, "write the final state as a snapshot");
  auto* slab = app.add_subcommand("slab", "periodic 1D slab run");
  add_common(slab, true);
  slab->add_option("--final", final_path, "write the final field as a snapshot");
  relax->get_option("--config")->required();
  slab->get_option("--config")->required();

  std::optional<std::size_t> ensemble;
  bool probe = false;
  auto* sweep = app.add_subcommand("sweep", "closed-form theorem sweep over random macrostates");
  add_common(sweep, true);
  sweep->add_option("--ensemble", ensemble, "number of random states");
  sweep->add_flag("--probe-negative-nu", probe, "add report-only nu < 0 cells");

  std::string kind, fixture_out, body = "f64le";
  double delta = 2.0;
  int x_cells = 8;
  auto* fixture = app.add_subcommand("fixture", "write a snapshot fixture");
  fixture->add_option("kind", kind, "maxwellian, zero, worked, bimodal, random, wave")->required();
  fixture->add_option("--file", fixture_out, "snapshot path")->required();
  fixture->add_option("--body", body, "f64le or csv")->check(CLI::IsMember({"f64le", "csv"}));
  fixture->add_option("--delta", delta, "internal degrees of freedom");
  fixture->add_option("--x-cells", x_cells, "cells for the wave fixture");
  add_common(fixture, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (moments->parsed()) return cmd_moments(common, snapshot_path);
    if (dec->parsed()) return cmd_decompose(common, snapshot_path, nu, theta, cell);
    if (relax->parsed()) return cmd_run(common, false, final_path);
    if (slab->parsed()) return cmd_run(common, true, final_path);
    if (sweep->parsed()) return cmd_sweep(common, ensemble, probe, sweep->count("--seed") > 0);
    if (fixture->parsed()) return cmd_fixture(common, kind, fixture_out, body, delta, x_cells);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::numerical);
  }
  return 1;
}
