#pragma once

/// Seeded random macrostates: Theta = Q^T diag(lambda) Q with Q from the QR
/// factorization of a normal 3x3 matrix, lambda_i ~ U[0.1, 10],
/// T_I ~ U[0.1, 10], rho ~ U[0.5, 2], delta drawn from a fixed set.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>

#include "polykin/linalg.hpp"
#include "polykin/moments.hpp"
#include "polykin/rng.hpp"

namespace polykin {

inline constexpr std::array<double, 5> kSamplerDeltas{1.0, 2.0, 3.0, 5.0, 7.5};

/// Orthogonal factor of the QR decomposition (modified Gram-Schmidt on columns).
inline Mat3 random_orthogonal(CounterRng& rng) {
  Mat3 a{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a[i][j] = rng.normal();
  Mat3 q{};
  for (int c = 0; c < 3; ++c) {
    Vec3 col{a[0][c], a[1][c], a[2][c]};
    for (int p = 0; p < c; ++p) {
      const Vec3 qp{q[0][p], q[1][p], q[2][p]};
      const double r = dot(qp, col);
      for (int i = 0; i < 3; ++i) col[i] -= r * qp[i];
    }
    const double nrm = std::sqrt(dot(col, col));
    for (int i = 0; i < 3; ++i) q[i][c] = col[i] / nrm;
  }
  return q;
}

struct SamplerRanges {
  double eig_lo = 0.1, eig_hi = 10.0;
  double t_int_lo = 0.1, t_int_hi = 10.0;
  double rho_lo = 0.5, rho_hi = 2.0;
};

/// Draw one macrostate. With `delta` unset, delta comes from kSamplerDeltas.
inline MacroState sample_macrostate(CounterRng& rng, std::optional<double> delta = std::nullopt,
                                    const SamplerRanges& r = {}) {
  const Mat3 q = random_orthogonal(rng);
  const Vec3 lam{rng.uniform(r.eig_lo, r.eig_hi), rng.uniform(r.eig_lo, r.eig_hi),
                 rng.uniform(r.eig_lo, r.eig_hi)};
  const double t_int = rng.uniform(r.t_int_lo, r.t_int_hi);
  const double rho = rng.uniform(r.rho_lo, r.rho_hi);
  double d;
  if (delta) {
    d = *delta;
  } else {
    const auto idx = static_cast<std::size_t>(rng.next_u64() % kSamplerDeltas.size());
    d = kSamplerDeltas[idx];
  }
  const Mat3 theta = symmetrized(matmul(matmul(transpose(q), diag3(lam)), q));
  return MacroState::from_fields(rho, {0.0, 0.0, 0.0}, theta, t_int, d);
}

}  // namespace polykin
