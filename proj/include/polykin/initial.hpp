#pragma once

/// Initial data for relaxation runs and test fixtures.

#include <cmath>
#include <numbers>
#include <vector>

#include "polykin/error.hpp"
#include "polykin/gaussian.hpp"
#include "polykin/moments.hpp"
#include "polykin/relaxation.hpp"
#include "polykin/rng.hpp"

namespace polykin {

/// Two counter-streaming Maxwellians of mass rho/2 each, drifting at +-u e_1.
/// Moments: U = 0, Theta = diag(T + u^2, T, T), T_I = T.
inline Distribution bimodal(double rho, double u, double T, double delta, const Grid& grid) {
  Distribution f = maxwellian(0.5 * rho, {u, 0.0, 0.0}, T, delta, grid);
  const Distribution g = maxwellian(0.5 * rho, {-u, 0.0, 0.0}, T, delta, grid);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] += g[i];
  return f;
}

/// base * (1 + amplitude * xi) with xi uniform on (-1, 1) per node; stays
/// positive for amplitude < 1.  Draws run in node order from one stream.
inline Distribution perturbed(const Distribution& base, double amplitude, std::uint64_t seed) {
  if (!(amplitude >= 0.0 && amplitude < 1.0))
    throw parameter_error("perturbation amplitude must lie in [0, 1)");
  Distribution f = base;
  CounterRng rng(seed, 0x9e3779b9ULL);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] *= 1.0 + amplitude * rng.uniform(-1.0, 1.0);
  return f;
}

/// Periodic slab initialised with Maxwellians at rest whose temperature
/// follows T0 (1 + amplitude sin(2 pi x / length)), sampled at cell centres.
inline SlabField temperature_wave(int cells, double rho, double T0, double amplitude, double delta,
                                  const Grid& grid) {
  if (cells < 1) throw parameter_error("temperature_wave: need at least one cell");
  if (!(std::fabs(amplitude) < 1.0)) throw parameter_error("temperature_wave: |amplitude| must be < 1");
  SlabField field;
  field.reserve(cells);
  for (int j = 0; j < cells; ++j) {
    const double T = T0 * (1.0 + amplitude * std::sin(2.0 * std::numbers::pi * (j + 0.5) / cells));
    field.push_back(maxwellian(rho, {0.0, 0.0, 0.0}, T, delta, grid));
  }
  return field;
}

}  // namespace polykin
