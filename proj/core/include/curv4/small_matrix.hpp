#pragma once

// Fixed-size matrices over arbitrary (AD) scalar types. Eigen is used for
// plain doubles; these helpers cover what the jet pipelines need.

#include <Eigen/Dense>

#include "curv4/dual.hpp"

#include <array>
#include <cstddef>

namespace curv4 {

template <typename T>
using Vec4 = std::array<T, 4>;
template <typename T>
using Mat4 = std::array<std::array<T, 4>, 4>;

template <typename T>
Mat4<T> zero_mat4() {
  Mat4<T> m;
  for (auto& row : m)
    for (auto& x : row) x = T(0.0);
  return m;
}

// Inverse of a symmetric positive definite 4x4 matrix by Gauss–Jordan
// elimination without pivoting.
template <typename T>
Mat4<T> inverse_spd(const Mat4<T>& a) {
  Mat4<T> m = a;
  Mat4<T> inv = zero_mat4<T>();
  for (int i = 0; i < 4; ++i) inv[i][i] = T(1.0);
  for (int c = 0; c < 4; ++c) {
    const T piv = T(1.0) / m[c][c];
    for (int k = 0; k < 4; ++k) {
      m[c][k] = m[c][k] * piv;
      inv[c][k] = inv[c][k] * piv;
    }
    for (int r = 0; r < 4; ++r) {
      if (r == c) continue;
      const T f = m[r][c];
      for (int k = 0; k < 4; ++k) {
        m[r][k] = m[r][k] - f * m[c][k];
        inv[r][k] = inv[r][k] - f * inv[c][k];
      }
    }
  }
  return inv;
}

// Determinant via LU without pivoting (SPD input).
template <typename T>
T determinant_spd(const Mat4<T>& a) {
  Mat4<T> m = a;
  T det = T(1.0);
  for (int c = 0; c < 4; ++c) {
    det = det * m[c][c];
    const T piv = T(1.0) / m[c][c];
    for (int r = c + 1; r < 4; ++r) {
      const T f = m[r][c] * piv;
      for (int k = c; k < 4; ++k) m[r][k] = m[r][k] - f * m[c][k];
    }
  }
  return det;
}

template <typename T>
Eigen::Matrix4d to_eigen_value(const Mat4<T>& m) {
  Eigen::Matrix4d r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r(i, j) = value(m[i][j]);
  return r;
}

inline Vec4<double> to_array(const Eigen::Vector4d& v) { return {v[0], v[1], v[2], v[3]}; }
inline Eigen::Vector4d to_vector(const Vec4<double>& v) { return {v[0], v[1], v[2], v[3]}; }

}  // namespace curv4
