#pragma once

/// The polyatomic Gaussian M_{nu,theta}(f): corrected temperature tensor,
/// relaxation temperature, normalization, and pointwise evaluation.

#include <cfloat>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "polykin/error.hpp"
#include "polykin/linalg.hpp"
#include "polykin/moments.hpp"
#include "polykin/params.hpp"
#include "polykin/quadrature.hpp"

namespace polykin {

/// Lambda_delta = 1 / int_0^inf exp(-I^(2/delta)) dI = 1 / Gamma(delta/2 + 1).
inline double lambda_delta(double delta) {
  if (!(std::isfinite(delta) && delta > 0.0))
    throw parameter_error("lambda_delta: delta must be positive");
  return 1.0 / std::tgamma(0.5 * delta + 1.0);
}

/// The same normalization from the grid's internal-energy rule.
inline double lambda_delta_quadrature(const Grid& grid) {
  return 1.0 / energy_gaussian_sum(grid, 1.0);
}

/// Relative mismatch between the Gamma-function and quadrature values.
inline double lambda_cross_check(const Grid& grid) {
  return std::fabs(lambda_delta_quadrature(grid) * std::tgamma(0.5 * grid.delta() + 1.0) - 1.0);
}

/// Corrected temperature tensor together with the eigenframe shared with Theta.
struct CorrectedTensor {
  Mat3 tensor{};       ///< (1-theta){(1-nu) T_tr Id + nu Theta} + theta T_delta Id
  Vec3 theta_eig{};    ///< eigenvalues Theta_i of Theta, ascending
  Vec3 eig{};          ///< A_i, paired with theta_eig
  Mat3 frame = identity3();  ///< P, columns are the common eigenvectors
  Mat3 inverse{};
  double det = 0.0;
  bool positive_definite = false;
};

inline constexpr double kSpdTolerance = 1e-12;

/// A_i = (1-theta){(1-nu) T_tr + nu Theta_i} + theta T_delta.
inline double corrected_eigenvalue(double theta_i, const MacroState& mac, const Params& p) {
  return (1.0 - p.theta) * ((1.0 - p.nu) * mac.T_tr + p.nu * theta_i) + p.theta * mac.T_delta;
}

/// Assemble the tensor without throwing; `positive_definite` records whether
/// every A_i exceeds kSpdTolerance * T_delta.
inline CorrectedTensor assemble_corrected_tensor(const MacroState& mac, const Params& p) {
  CorrectedTensor ct;
  const Mat3 id = identity3();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      ct.tensor[i][j] = (1.0 - p.theta) * ((1.0 - p.nu) * mac.T_tr * id[i][j] + p.nu * mac.Theta[i][j]) +
                        p.theta * mac.T_delta * id[i][j];

  const SymEigen3 es = jacobi_eigen(mac.Theta);
  ct.theta_eig = es.values;
  ct.frame = es.vectors;
  ct.positive_definite = true;
  ct.det = 1.0;
  for (int i = 0; i < 3; ++i) {
    ct.eig[i] = corrected_eigenvalue(es.values[i], mac, p);
    ct.det *= ct.eig[i];
    if (!(ct.eig[i] > kSpdTolerance * mac.T_delta)) ct.positive_definite = false;
  }
  if (ct.positive_definite) {
    const Vec3 inv{1.0 / ct.eig[0], 1.0 / ct.eig[1], 1.0 / ct.eig[2]};
    ct.inverse = symmetrized(matmul(matmul(ct.frame, diag3(inv)), transpose(ct.frame)));
  }
  return ct;
}

inline CorrectedTensor corrected_tensor(const MacroState& mac, const Params& p) {
  CorrectedTensor ct = assemble_corrected_tensor(mac, p);
  if (!ct.positive_definite)
    throw numerical_error("tensor not positive definite (smallest eigenvalue " +
                          std::to_string(ct.eig[0]) + ")");
  return ct;
}

/// T_theta = (1 - theta) T_I + theta T_delta.
inline double relaxation_temperature(const MacroState& mac, const Params& p) {
  if (!(mac.T_I > 0.0 && mac.T_delta > 0.0))
    throw parameter_error("relaxation temperature needs positive T_I and T_delta");
  return (1.0 - p.theta) * mac.T_I + p.theta * mac.T_delta;
}

/// rho Lambda_delta / (sqrt(det(2 pi T)) T_theta^(delta/2)).
inline double gaussian_prefactor(double rho, double det, double t_int, double delta) {
  const double two_pi_cubed = 8.0 * std::numbers::pi * std::numbers::pi * std::numbers::pi;
  return rho * lambda_delta(delta) / (std::sqrt(two_pi_cubed * det) * std::pow(t_int, 0.5 * delta));
}

/// Evaluate  pref * exp(-(v-U)^T inv (v-U) / 2 - eps / t_int)  on every node.
/// Values are floored at DBL_MIN so the result stays strictly positive.
inline Distribution evaluate_gaussian(double pref, const Vec3& U, const Mat3& inv, double t_int,
                                      const Grid& grid) {
  Distribution out(grid);
  const auto ne = grid.energy_size();
  std::vector<double> energy_part(ne);
  for (std::size_t m = 0; m < ne; ++m) energy_part[m] = std::exp(-grid.eps()[m] / t_int);
  double* p = out.values().data();
  for (std::size_t k = 0; k < grid.velocity_size(); ++k) {
    const Vec3 v = grid.velocity(k);
    const Vec3 c{v[0] - U[0], v[1] - U[1], v[2] - U[2]};
    const double vel = pref * std::exp(-0.5 * quadratic_form(inv, c));
    for (std::size_t m = 0; m < ne; ++m) p[k * ne + m] = std::fmax(vel * energy_part[m], DBL_MIN);
  }
  return out;
}

inline void require_grid_delta(const Grid& grid, double delta) {
  if (std::fabs(grid.delta() - delta) > 1e-14 * std::fmax(1.0, delta))
    throw parameter_error("delta does not match the grid's delta");
}

/// M_{nu,theta}(f) built from the macroscopic state of f.
inline Distribution build_gaussian(const MacroState& mac, const Params& p, const Grid& grid) {
  require_grid_delta(grid, mac.delta);
  const CorrectedTensor ct = corrected_tensor(mac, p);
  const double t_theta = relaxation_temperature(mac, p);
  return evaluate_gaussian(gaussian_prefactor(mac.rho, ct.det, t_theta, mac.delta), mac.U,
                           ct.inverse, t_theta, grid);
}

/// Anisotropic fixture: velocity covariance `sigma`, internal temperature `t_int`.
inline Distribution ellipsoidal(double rho, const Vec3& U, const Mat3& sigma, double t_int,
                                const Grid& grid) {
  if (!(rho > 0.0 && t_int > 0.0)) throw parameter_error("ellipsoidal: rho and T must be positive");
  const SymEigen3 es = jacobi_eigen(sigma);
  if (!(es.values[0] > 0.0)) throw parameter_error("ellipsoidal: covariance must be SPD");
  const Vec3 inv_eig{1.0 / es.values[0], 1.0 / es.values[1], 1.0 / es.values[2]};
  const Mat3 inv = symmetrized(matmul(matmul(es.vectors, diag3(inv_eig)), transpose(es.vectors)));
  const double det = es.values[0] * es.values[1] * es.values[2];
  return evaluate_gaussian(gaussian_prefactor(rho, det, t_int, grid.delta()), U, inv, t_int, grid);
}

/// Isotropic equilibrium with a common temperature T for all modes.
inline Distribution maxwellian(double rho, const Vec3& U, double T, double delta, const Grid& grid) {
  if (!(rho > 0.0 && T > 0.0)) throw parameter_error("maxwellian: rho and T must be positive");
  require_grid_delta(grid, delta);
  const Mat3 inv = diag3({1.0 / T, 1.0 / T, 1.0 / T});
  return evaluate_gaussian(gaussian_prefactor(rho, T * T * T, T, delta), U, inv, T, grid);
}

}  // namespace polykin
