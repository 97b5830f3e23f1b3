#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "polykin/gaussian.hpp"
#include "polykin/initial.hpp"
#include "polykin/linalg.hpp"
#include "polykin/moments.hpp"
#include "polykin/quadrature.hpp"
#include "polykin/rng.hpp"
#include "polykin/sampler.hpp"

namespace testing_support {

using namespace polykin;

/// Grid sized for a macrostate: velocities cover its largest eigenvalue and
/// T_delta, energies cover T_I and T_delta.
inline Grid grid_for(const MacroState& m, int v_points = 32, int e_points = 32) {
  const SymEigen3 es = jacobi_eigen(m.Theta);
  const double u = std::max({std::fabs(m.U[0]), std::fabs(m.U[1]), std::fabs(m.U[2])});
  return build_grid(GridSpec::for_temperature(std::max(es.values[2], m.T_delta), std::max(m.T_I, m.T_delta), u,
                                              m.delta, v_points, e_points));
}

/// An anisotropic Gaussian times multiplicative noise: strictly positive,
/// not of Gaussian form.
inline Distribution random_positive(const MacroState& m, const Grid& g, double amplitude, std::uint64_t seed) {
  return perturbed(ellipsoidal(m.rho, m.U, m.Theta, m.T_I, g), amplitude, seed);
}

/// Sampler state with eigenvalues restricted to a band, so a modest grid resolves it.
inline MacroState moderate_state(std::uint64_t seed, double delta) {
  CounterRng rng(seed, 7);
  SamplerRanges r;
  r.eig_lo = 0.5;
  r.eig_hi = 2.0;
  r.t_int_lo = 0.5;
  r.t_int_hi = 2.0;
  return sample_macrostate(rng, delta, r);
}

inline double relative(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

}  // namespace testing_support
