#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>

#include "polykin/config.hpp"
#include "polykin/error.hpp"
#include "polykin/report.hpp"
#include "polykin/snapshot.hpp"
#include "polykin/sweep.hpp"
#include "support.hpp"

using namespace polykin;

namespace {

GridSpec small_spec(double delta = 2.0) { return GridSpec::for_temperature(1.0, 1.0, 0.0, delta, 8, 8); }

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::numerical;
}

Snapshot roundtrip(const GridSpec& spec, const std::vector<Distribution>& cells, SnapshotFormat fmt) {
  std::stringstream ss;
  write_snapshot(ss, spec, cells, fmt);
  return read_snapshot(ss);
}

std::string with_body(const std::string& header, const std::string& body) {
  return std::string(kSnapshotMagic) + "\n" + header + "\n" + body;
}

}  // namespace

TEST(Snapshot, RoundTripBinaryIsBitExact) {
  const GridSpec spec = small_spec(3.0);
  const Grid g(spec);
  const Distribution f = testing_support::random_positive(
      MacroState::from_fields(1.0, {0.0, 0.0, 0.0}, diag3({0.8, 1.0, 1.2}), 0.9, 3.0), g, 0.5, 4);
  const Snapshot s = roundtrip(spec, {f}, SnapshotFormat::f64le);
  ASSERT_EQ(s.cells.size(), 1u);
  EXPECT_EQ(s.format, SnapshotFormat::f64le);
  EXPECT_TRUE(s.cells[0].grid() == g);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(s.cells[0][i], f[i]);
}

TEST(Snapshot, RoundTripCsvIsBitExact) {
  const GridSpec spec = small_spec();
  const Grid g(spec);
  const Distribution f = testing_support::random_positive(
      MacroState::from_fields(1.0, {0.1, 0.0, 0.0}, diag3({0.8, 1.0, 1.2}), 0.9, 2.0), g, 0.5, 9);
  const Snapshot s = roundtrip(spec, {f}, SnapshotFormat::csv);
  EXPECT_EQ(s.format, SnapshotFormat::csv);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(s.cells[0][i], f[i]);
}

TEST(Snapshot, MultiCellField) {
  const GridSpec spec = small_spec();
  const SlabField field = temperature_wave(3, 1.0, 1.0, 0.2, 2.0, Grid(spec));
  for (SnapshotFormat fmt : {SnapshotFormat::f64le, SnapshotFormat::csv}) {
    const Snapshot s = roundtrip(spec, field, fmt);
    ASSERT_EQ(s.cells.size(), 3u);
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t i = 0; i < field[j].size(); ++i) EXPECT_EQ(s.cells[j][i], field[j][i]);
  }
}

TEST(Snapshot, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "polykin_io_test.snap";
  const GridSpec spec = small_spec();
  const Distribution f = maxwellian(1.0, {0.0, 0.0, 0.0}, 1.0, 2.0, Grid(spec));
  save_snapshot(path.string(), spec, {f});
  const Snapshot s = load_snapshot(path.string());
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(s.cells[0][i], f[i]);
  std::filesystem::remove(path);
  EXPECT_EQ(kind_of([&] { load_snapshot(path.string()); }), ErrorKind::parse);
}

TEST(Snapshot, MalformedInputsAreParseErrors) {
  const GridSpec spec = small_spec();
  const Grid g(spec);
  std::stringstream good;
  write_snapshot(good, spec, {maxwellian(1.0, {0.0, 0.0, 0.0}, 1.0, 2.0, g)});
  const std::string text = good.str();

  auto read = [](const std::string& s) {
    std::istringstream is(s);
    read_snapshot(is);
  };
  EXPECT_EQ(kind_of([&] { read(""); }), ErrorKind::parse);
  EXPECT_EQ(kind_of([&] { read("not-a-snapshot\n{}\n"); }), ErrorKind::parse);
  EXPECT_EQ(kind_of([&] { read(text.substr(0, text.size() - 3)); }), ErrorKind::parse);
  EXPECT_EQ(kind_of([&] { read(text + "x"); }), ErrorKind::parse);

  const std::string header =
      R"({"format":"csv","v_extent":6,"v_points_per_axis":8,"energy_variable_max":30,"energy_points":8,"delta":2})";
  const std::size_t n = g.size();
  std::string body;
  for (std::size_t i = 0; i < n; ++i) body += "1\n";
  EXPECT_NO_THROW(read(with_body(header, body)));
  EXPECT_EQ(kind_of([&] { read(with_body(header, body + "1\n")); }), ErrorKind::parse);
  EXPECT_EQ(kind_of([&] { read(with_body(header, "abc\n" + body.substr(2))); }), ErrorKind::parse);
  EXPECT_EQ(kind_of([&] { read(with_body(header, "-1\n" + body.substr(2))); }), ErrorKind::parse);
  EXPECT_EQ(kind_of([&] { read(with_body(header, "nan\n" + body.substr(2))); }), ErrorKind::parse);
  EXPECT_EQ(kind_of([&] { read(with_body("{\"format\":\"csv\"}", body)); }), ErrorKind::parse);
  EXPECT_EQ(kind_of([&] { read(with_body("{broken", body)); }), ErrorKind::parse);
  const std::string odd_grid =
      R"({"format":"csv","v_extent":6,"v_points_per_axis":7,"energy_variable_max":30,"energy_points":8,"delta":2})";
  EXPECT_EQ(kind_of([&] { read(with_body(odd_grid, body)); }), ErrorKind::parse);
  const std::string bad_format =
      R"({"format":"f32","v_extent":6,"v_points_per_axis":8,"energy_variable_max":30,"energy_points":8,"delta":2})";
  EXPECT_EQ(kind_of([&] { read(with_body(bad_format, body)); }), ErrorKind::parse);
}

TEST(Snapshot, WriterRejectsMixedGrids) {
  const Distribution a = maxwellian(1.0, {0.0, 0.0, 0.0}, 1.0, 2.0, Grid(small_spec()));
  EXPECT_THROW(write_snapshot(std::cout, small_spec(3.0), {a}), Error);
  std::ostringstream os;
  EXPECT_THROW(write_snapshot(os, small_spec(), {}), Error);
}

TEST(Config, HomogeneousRunFromJson) {
  const auto j = nlohmann::json::parse(R"({
    "params": {"nu": 0.5, "theta": 0.25, "delta": 3},
    "t_end": 2, "dt": 0.01, "scheme": "rk4", "sample_every": 5,
    "initial": {"kind": "ellipsoidal", "rho": 1.5, "U": [0.1, 0, 0],
                "sigma": [[0.8, 0.1, 0], [0.1, 1, 0], [0, 0, 1.2]], "T_I": 1.1}
  })");
  const LoadedRun run = load_run(j, 1, GridPreset{16, 16});
  EXPECT_EQ(run.config.scheme, Scheme::rk4);
  EXPECT_EQ(run.config.sample_every, 5);
  EXPECT_EQ(run.config.grid.v_points_per_axis, 16);
  EXPECT_DOUBLE_EQ(run.config.params.delta, 3.0);
  ASSERT_TRUE(run.initial.has_value());
  const MacroState m = compute_macro(*run.initial);
  EXPECT_NEAR(m.rho, 1.5, 1e-4);
  EXPECT_NEAR(m.U[0], 0.1, 1e-4);
  EXPECT_NEAR(m.Theta[0][1], 0.1, 1e-4);
  EXPECT_NEAR(m.T_I, 1.1, 1e-4);
}

TEST(Config, CollisionTimeUnit) {
  const auto j = nlohmann::json::parse(R"({
    "params": {"nu": 0.5, "theta": 0.5, "delta": 2},
    "time_unit": "collision", "t_end": 4, "dt": 0.1,
    "initial": {"kind": "maxwellian", "rho": 2, "T": 1.5}
  })");
  const LoadedRun run = load_run(j, 1, GridPreset{16, 16});
  const double A = collision_frequency(compute_macro(*run.initial), run.config.params);
  EXPECT_NEAR(A, 2.0 * 1.5 / 0.75, 1e-3);
  EXPECT_NEAR(run.config.t_end * A, 4.0, 1e-12);
  EXPECT_NEAR(run.config.dt * A, 0.1, 1e-12);
}

TEST(Config, SlabRunFromJson) {
  const auto j = nlohmann::json::parse(R"({
    "params": {"nu": 0.2, "theta": 0.5, "delta": 2},
    "t_end": 0.1,
    "slab": {"x_cells": 6, "x_length": 2, "cfl": 0.5,
             "initial": {"kind": "temperature_wave", "rho": 1, "T0": 1, "amplitude": 0.1}}
  })");
  const LoadedRun run = load_run(j, 1, GridPreset{16, 16});
  ASSERT_TRUE(run.config.slab.has_value());
  ASSERT_TRUE(run.slab_initial.has_value());
  EXPECT_EQ(run.slab_initial->size(), 6u);
  const double vmax = Grid(run.config.grid).axis().back();
  EXPECT_NEAR(run.config.dt, 0.5 * (2.0 / 6.0) / vmax, 1e-15);
  EXPECT_DOUBLE_EQ(run.config.h_tolerance, 1e-8);
}

TEST(Config, RandomInitialIsSeeded) {
  const auto j = nlohmann::json::parse(R"({
    "params": {"nu": 0.5, "theta": 0.5, "delta": 2}, "t_end": 1, "dt": 0.1,
    "initial": {"kind": "random"}
  })");
  const LoadedRun a = load_run(j, 7, GridPreset{16, 16});
  const LoadedRun b = load_run(j, 7, GridPreset{16, 16});
  const LoadedRun c = load_run(j, 8, GridPreset{16, 16});
  EXPECT_EQ(a.initial->values()[100], b.initial->values()[100]);
  EXPECT_NE(integrate(*a.initial), integrate(*c.initial));
}

TEST(Config, ErrorsCarryTheRightKind) {
  auto load = [](const char* text) { load_run(nlohmann::json::parse(text), 1, GridPreset{16, 16}); };
  EXPECT_EQ(kind_of([&] { load(R"({"t_end": 1, "dt": 0.1})"); }), ErrorKind::parse);
  EXPECT_EQ(kind_of([&] { load(R"({"params": {"nu": 1.5}, "t_end": 1, "dt": 0.1})"); }), ErrorKind::parameter);
  EXPECT_EQ(kind_of([&] { load(R"({"params": {}, "t_end": 1})"); }), ErrorKind::parameter);
  EXPECT_EQ(kind_of([&] { load(R"({"params": {}, "t_end": 1, "dt": 0.1, "scheme": "leapfrog"})"); }),
            ErrorKind::parameter);
  EXPECT_EQ(kind_of([&] { load(R"({"params": {}, "t_end": "x", "dt": 0.1})"); }), ErrorKind::parse);
  EXPECT_EQ(kind_of([&] { load(R"({"params": {}, "t_end": 1, "dt": 0.1, "initial": {"kind": "cube"}})"); }),
            ErrorKind::parameter);
  EXPECT_EQ(kind_of([&] { grid_preset("huge"); }), ErrorKind::parameter);
  const auto missing = std::filesystem::temp_directory_path() / "polykin_no_such_config.json";
  EXPECT_EQ(kind_of([&] { read_json_file(missing.string()); }), ErrorKind::parse);
}

TEST(Config, SweepFromJson) {
  const SweepConfig s = load_sweep(nlohmann::json::parse(R"({"seed": 3, "ensemble": 50, "nu": [0, 0.5],
                                                             "theta": [1], "delta": [2, 5]})"));
  EXPECT_EQ(s.seed, 3u);
  EXPECT_EQ(s.ensemble, 50u);
  EXPECT_EQ(run_sweep(s).size(), 4u);
  EXPECT_EQ(kind_of([] { load_sweep(nlohmann::json::parse(R"({"nu": [-0.2]})")); }), ErrorKind::parameter);
  EXPECT_EQ(kind_of([] { load_sweep(nlohmann::json::parse(R"({"nu": "x"})")); }), ErrorKind::parse);
}

TEST(Report, CsvRowsAndJson) {
  const MacroState s = testing_support::moderate_state(2, 2.0);
  const Grid g = testing_support::grid_for(s, 16, 16);
  const EntropyReport r = decompose(ellipsoidal(s.rho, s.U, s.Theta, s.T_I, g), {0.5, 0.5, 2.0});
  const std::string row = report_csv_row(9, r);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','),
            std::count(kReportCsvHeader, kReportCsvHeader + std::strlen(kReportCsvHeader), ','));
  EXPECT_EQ(row.substr(0, 2), "9,");
  EXPECT_EQ(row.back(), '1');
  const Json j = to_json(r);
  EXPECT_EQ(j.at("regime"), "theorem");
  EXPECT_DOUBLE_EQ(j.at("theorem_bound").get<double>(), 5.0);
  EXPECT_TRUE(json_number(std::numeric_limits<double>::quiet_NaN()).is_null());
  EXPECT_EQ(csv_number(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(csv_number(0.1), "0.1");
}

TEST(Report, TrajectoryCsv) {
  const Grid g = build_grid(GridSpec::for_temperature(1.0, 1.0, 0.0, 2.0, 16, 32));
  RunConfig cfg;
  cfg.grid = g.spec();
  cfg.params = {0.5, 0.5, 2.0};
  cfg.dt = 0.1;
  cfg.t_end = 0.3;
  const Trajectory tr = run_homogeneous(maxwellian(1.0, {0.0, 0.0, 0.0}, 1.0, 2.0, g), cfg);
  std::ostringstream os;
  write_trajectory_csv(os, tr);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, kTrajectoryCsvHeader);
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 4);
  const Json summary = trajectory_summary(tr);
  EXPECT_EQ(summary.at("steps").get<int>(), 3);
  EXPECT_TRUE(summary.at("h_monotone").get<bool>());
  EXPECT_EQ(trajectory_json(tr).size(), 4u);
}

TEST(Sweep, DeterministicPerSeed) {
  SweepConfig cfg;
  cfg.ensemble = 200;
  cfg.seed = 11;
  const auto a = run_sweep(cfg);
  cfg.workers = 1;
  const auto b = run_sweep(cfg);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].min_R, b[i].min_R);
    EXPECT_EQ(a[i].max_lhs_excess, b[i].max_lhs_excess);
  }
  const auto s1 = sweep_states(cfg, std::nullopt);
  cfg.ensemble = 50;
  const auto s2 = sweep_states(cfg, std::nullopt);
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(s1[i].T_delta, s2[i].T_delta);
}

TEST(Sweep, BgkColumnIsZero) {
  SweepConfig cfg;
  cfg.ensemble = 1000;
  cfg.nu = {0.0};
  cfg.theta = {0.0};
  const auto cells = run_sweep(cfg);
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_LE(std::fabs(cells[0].min_R), 1e-12);
  EXPECT_LE(std::fabs(cells[0].max_R), 1e-12);
}

TEST(Sweep, ProbeFindsNegativeRemainder) {
  SweepConfig cfg;
  cfg.ensemble = 2000;
  cfg.nu = {0.5};
  cfg.theta = {0.0};
  cfg.probe_negative_nu = true;
  const auto cells = run_sweep(cfg);
  ASSERT_EQ(cells.size(), 3u);
  EXPECT_TRUE(cells[0].asserted);
  EXPECT_FALSE(cells[1].asserted);
  EXPECT_LT(cells[1].min_R, 0.0);
  EXPECT_LT(cells[2].min_R, cells[1].min_R);
  EXPECT_TRUE(sweep_passed(cells));
}
