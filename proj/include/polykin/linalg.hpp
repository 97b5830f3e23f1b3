#pragma once

/// Small fixed-size linear algebra used by the moment and Gaussian code:
/// 3-vectors, symmetric 3x3 matrices and a cyclic Jacobi eigensolver.

#include <array>
#include <cmath>
#include <cstddef>

namespace polykin {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

inline constexpr Mat3 identity3() {
  return {{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
}

inline constexpr Mat3 diag3(const Vec3& d) {
  return {{{d[0], 0.0, 0.0}, {0.0, d[1], 0.0}, {0.0, 0.0, d[2]}}};
}

inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline double trace(const Mat3& m) { return m[0][0] + m[1][1] + m[2][2]; }

inline Mat3 transpose(const Mat3& m) {
  Mat3 t{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t[i][j] = m[j][i];
  return t;
}

inline Mat3 matmul(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a[i][k] * b[k][j];
      c[i][j] = s;
    }
  return c;
}

inline Vec3 matvec(const Mat3& a, const Vec3& x) {
  return {dot(a[0], x), dot(a[1], x), dot(a[2], x)};
}

/// x^T M x
inline double quadratic_form(const Mat3& m, const Vec3& x) {
  return dot(x, matvec(m, x));
}

inline Mat3 symmetrized(const Mat3& m) {
  Mat3 s{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s[i][j] = 0.5 * (m[i][j] + m[j][i]);
  return s;
}

inline double frobenius(const Mat3& a, const Mat3& b) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s += a[i][j] * b[i][j];
  return s;
}

inline double max_abs_diff(const Mat3& a, const Mat3& b) {
  double m = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m = std::fmax(m, std::fabs(a[i][j] - b[i][j]));
  return m;
}

/// Eigen-decomposition of a symmetric 3x3 matrix: M = P diag(values) P^T.
/// Columns of `vectors` are the eigenvectors; values are sorted ascending.
struct SymEigen3 {
  Vec3 values{};
  Mat3 vectors = identity3();

  Mat3 reconstruct() const {
    return matmul(matmul(vectors, diag3(values)), transpose(vectors));
  }
};

/// Cyclic Jacobi rotations until the off-diagonal mass drops below
/// `tol` times the Frobenius norm of the input.
inline SymEigen3 jacobi_eigen(const Mat3& input, double tol = 1e-13,
                              int max_sweeps = 64) {
  Mat3 a = symmetrized(input);
  Mat3 v = identity3();
  const double scale = std::sqrt(frobenius(a, a));
  if (scale > 0.0) {
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      const double off = std::sqrt(2.0 * (a[0][1] * a[0][1] + a[0][2] * a[0][2] +
                                          a[1][2] * a[1][2]));
      if (off <= tol * scale) break;
      for (int p = 0; p < 2; ++p) {
        for (int q = p + 1; q < 3; ++q) {
          if (a[p][q] == 0.0) continue;
          // Rotation angle from the classical symmetric Schur decomposition.
          const double tau = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
          const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                           (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
          const double c = 1.0 / std::sqrt(1.0 + t * t);
          const double s = t * c;
          for (int k = 0; k < 3; ++k) {
            const double akp = a[k][p];
            const double akq = a[k][q];
            a[k][p] = c * akp - s * akq;
            a[k][q] = s * akp + c * akq;
          }
          for (int k = 0; k < 3; ++k) {
            const double apk = a[p][k];
            const double aqk = a[q][k];
            a[p][k] = c * apk - s * aqk;
            a[q][k] = s * apk + c * aqk;
          }
          for (int k = 0; k < 3; ++k) {
            const double vkp = v[k][p];
            const double vkq = v[k][q];
            v[k][p] = c * vkp - s * vkq;
            v[k][q] = s * vkp + c * vkq;
          }
        }
      }
    }
  }

  SymEigen3 out;
  std::array<int, 3> order{0, 1, 2};
  // insertion sort on three entries
  for (int i = 1; i < 3; ++i)
    for (int j = i; j > 0 && a[order[j]][order[j]] < a[order[j - 1]][order[j - 1]]; --j)
      std::swap(order[j], order[j - 1]);
  for (int c = 0; c < 3; ++c) {
    out.values[c] = a[order[c]][order[c]];
    for (int r = 0; r < 3; ++r) out.vectors[r][c] = v[r][order[c]];
  }
  return out;
}

}  // namespace polykin
