#pragma once

/// Closed-form certification sweep: theorem_check over a seeded ensemble of
/// macrostates for every (nu, theta) cell of a parameter lattice.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "polykin/entropy.hpp"
#include "polykin/error.hpp"
#include "polykin/parallel.hpp"
#include "polykin/params.hpp"
#include "polykin/rng.hpp"
#include "polykin/sampler.hpp"

namespace polykin {

struct SweepConfig {
  std::uint64_t seed = 1;
  std::size_t ensemble = 10000;
  std::vector<double> nu{0.0, 0.25, 0.5, 0.75, 0.99};
  std::vector<double> theta{0.0, 0.25, 0.5, 0.75, 1.0};
  /// Empty: every state draws delta from kSamplerDeltas.  Otherwise the
  /// ensemble is repeated for each listed delta.
  std::vector<double> delta;
  bool probe_negative_nu = false;
  std::vector<double> probe_nu{-0.25, -0.45};
  unsigned workers = 0;

  void validate() const {
    if (ensemble == 0) throw parameter_error("sweep: ensemble must be positive");
    if (nu.empty() || theta.empty()) throw parameter_error("sweep: nu and theta lists must be non-empty");
    for (double n : nu) {
      if (n < 0.0 && !probe_negative_nu)
        throw parameter_error("sweep: negative nu needs probe_negative_nu");
      Params{n, 0.0, 1.0}.validate();
    }
    for (double t : theta) Params{0.0, t, 1.0}.validate();
    for (double d : delta) Params{0.0, 0.0, d}.validate();
    if (probe_negative_nu)
      for (double n : probe_nu) {
        Params{n, 0.0, 1.0}.validate();
        if (n >= 0.0) throw parameter_error("sweep: probe_nu entries must be negative");
      }
  }

  /// The nu values actually swept: `nu`, then the probe values when enabled.
  std::vector<double> nu_values() const {
    std::vector<double> out = nu;
    if (probe_negative_nu)
      for (double n : probe_nu)
        if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
    return out;
  }
};

struct SweepCell {
  double nu = 0.0;
  double theta = 0.0;
  std::optional<double> delta;  ///< unset when delta varies across the ensemble
  bool asserted = false;        ///< false: report-only (nu < 0)
  std::size_t states = 0;
  std::size_t undefined = 0;    ///< tensor not positive definite
  double min_R = std::numeric_limits<double>::infinity();
  double max_R = -std::numeric_limits<double>::infinity();
  double max_lhs_excess = -std::numeric_limits<double>::infinity();  ///< max(lhs - (3 + delta))
  double max_F_excess = -std::numeric_limits<double>::infinity();    ///< max(F_theta - F_bound)
  std::size_t violations = 0;   ///< failed theorem_check among asserted states
};

/// Macrostates of the ensemble; state i depends only on (seed, i, delta).
inline std::vector<MacroState> sweep_states(const SweepConfig& cfg, std::optional<double> delta) {
  std::vector<MacroState> states(cfg.ensemble);
  for (std::size_t i = 0; i < cfg.ensemble; ++i) {
    CounterRng rng(cfg.seed, i);
    states[i] = sample_macrostate(rng, delta);
  }
  return states;
}

inline SweepCell sweep_cell(const std::vector<MacroState>& states, const Params& p) {
  SweepCell c;
  c.nu = p.nu;
  c.theta = p.theta;
  c.asserted = p.theorem_regime();
  c.states = states.size();
  for (const MacroState& mac : states) {
    Params q = p;
    q.delta = mac.delta;
    const TheoremCheck tc = theorem_check(mac, q);
    if (!tc.R_defined) {
      ++c.undefined;
      if (c.asserted) ++c.violations;
      continue;
    }
    c.min_R = std::min(c.min_R, tc.R_closed);
    c.max_R = std::max(c.max_R, tc.R_closed);
    c.max_lhs_excess = std::max(c.max_lhs_excess, tc.lhs - tc.bound);
    c.max_F_excess = std::max(c.max_F_excess, tc.F_theta - tc.F_bound);
    if (c.asserted && !(tc.ok && tc.chain_ok)) ++c.violations;
  }
  return c;
}

/// Cells ordered by (delta, nu, theta) as listed; evaluated in parallel,
/// each written to its own slot.
inline std::vector<SweepCell> run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  std::vector<std::optional<double>> deltas;
  if (cfg.delta.empty()) {
    deltas.push_back(std::nullopt);
  } else {
    for (double d : cfg.delta) deltas.push_back(d);
  }
  const std::vector<double> nus = cfg.nu_values();
  std::vector<SweepCell> cells;
  for (const auto& d : deltas) {
    const std::vector<MacroState> states = sweep_states(cfg, d);
    std::vector<SweepCell> block(nus.size() * cfg.theta.size());
    parallel_for(
        block.size(),
        [&](std::size_t i) {
          const Params p{nus[i / cfg.theta.size()], cfg.theta[i % cfg.theta.size()], d.value_or(2.0)};
          block[i] = sweep_cell(states, p);
          block[i].delta = d;
        },
        cfg.workers);
    cells.insert(cells.end(), block.begin(), block.end());
  }
  return cells;
}

inline bool sweep_passed(const std::vector<SweepCell>& cells) {
  for (const auto& c : cells)
    if (c.asserted && c.violations > 0) return false;
  return true;
}

}  // namespace polykin
