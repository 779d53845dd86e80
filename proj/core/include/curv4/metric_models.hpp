#pragma once

// Closed-form metric models evaluated over any scalar type (double or nested
// duals). Kähler models are specified through radial potentials
// Φ(s₁, s₂) with s_a = |z_a|², from which
//   h_{ab̄} = δ_ab ∂Φ/∂s_a + ∂²Φ/∂s_a∂s_b · z̄_a z_b
// and the Riemannian metric is 2 Re h in real coordinates (x₁, y₁, x₂, y₂).

#include "curv4/dual.hpp"
#include "curv4/small_matrix.hpp"

#include <optional>
#include <variant>

namespace curv4 {

// Derivatives of a radial potential with respect to s₁ = |z₁|², s₂ = |z₂|².
template <typename T>
struct RadialPotentialJet {
  T phi;
  T p1, p2;
  T p11, p12, p22;
};

template <typename T>
Mat4<T> kaehler_metric_from_radial(const Vec4<T>& x, const RadialPotentialJet<T>& f) {
  // complex coordinates z_a = x[2a] + i x[2a+1]
  const T pa[2] = {f.p1, f.p2};
  const T pab[2][2] = {{f.p11, f.p12}, {f.p12, f.p22}};
  Mat4<T> g = zero_mat4<T>();
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const T& xa = x[2 * a];
      const T& ya = x[2 * a + 1];
      const T& xb = x[2 * b];
      const T& yb = x[2 * b + 1];
      // z̄_a z_b = (xa xb + ya yb) + i (xa yb - ya xb)
      T re = pab[a][b] * (xa * xb + ya * yb);
      T im = pab[a][b] * (xa * yb - ya * xb);
      if (a == b) re = re + pa[a];
      g[2 * a][2 * b] = 2.0 * re;
      g[2 * a + 1][2 * b + 1] = 2.0 * re;
      g[2 * a][2 * b + 1] = 2.0 * im;
      g[2 * a + 1][2 * b] = -2.0 * im;
    }
  }
  return g;
}

// Standard complex structure in holomorphic real coordinates:
// J ∂x_a = ∂y_a, J ∂y_a = -∂x_a (columns are images of basis vectors).
inline Eigen::Matrix4d standard_complex_structure() {
  Eigen::Matrix4d j = Eigen::Matrix4d::Zero();
  j(1, 0) = 1.0;
  j(0, 1) = -1.0;
  j(3, 2) = 1.0;
  j(2, 3) = -1.0;
  return j;
}

enum class ChartDomain { Box, Ball, Bidisk };

// Euclidean 4-space (single chart, used as a curvature-free reference).
struct FlatModel {
  static constexpr int chart_count = 1;
  ChartDomain domain() const { return ChartDomain::Box; }

  template <typename T>
  Mat4<T> metric(int, const Vec4<T>&) const {
    Mat4<T> g = zero_mat4<T>();
    for (int i = 0; i < 4; ++i) g[i][i] = T(1.0);
    return g;
  }

  template <typename T>
  std::optional<Vec4<T>> transition(int from, int to, const Vec4<T>& x) const {
    if (from == 0 && to == 0) return x;
    return std::nullopt;
  }
};

// Round S⁴ of radius r: two stereographic charts with the orientation
// preserving transition x ↦ (x₁, x₂, x₃, -x₄)/|x|².
struct RoundSphereModel {
  double radius = 1.0;
  static constexpr int chart_count = 2;
  ChartDomain domain() const { return ChartDomain::Ball; }

  template <typename T>
  Mat4<T> metric(int, const Vec4<T>& x) const {
    const T r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
    const T den = 1.0 + r2;
    const T c = (4.0 * radius * radius) / (den * den);
    Mat4<T> g = zero_mat4<T>();
    for (int i = 0; i < 4; ++i) g[i][i] = c;
    return g;
  }

  template <typename T>
  std::optional<Vec4<T>> transition(int from, int to, const Vec4<T>& x) const {
    if (from == to) return x;
    const T r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
    if (value(r2) < 1e-14) return std::nullopt;
    const T inv = 1.0 / r2;
    return Vec4<T>{x[0] * inv, x[1] * inv, x[2] * inv, -x[3] * inv};
  }
};

// Complex division helper for chart transitions.
template <typename T>
struct Cx {
  T re, im;
};
template <typename T>
Cx<T> cdiv(const Cx<T>& a, const Cx<T>& b) {
  const T den = b.re * b.re + b.im * b.im;
  return {(a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den};
}
template <typename T>
Cx<T> cinv(const Cx<T>& b) {
  const T den = b.re * b.re + b.im * b.im;
  return {b.re / den, -b.im / den};
}

enum class PerturbationPotential { None, HeightProduct };

// Kähler metrics on S²×S² = ℂP¹×ℂP¹:
//   Φ = 2A log(1+|z₁|²) + 2B log(1+|z₂|²) + ε φ,
// i.e. the product of round spheres of radii √A, √B plus i ε ∂∂̄φ.
// Chart 2c₁ + c₂ uses z (c = 0) or w = 1/z (c = 1) on each factor.
struct KaehlerProductModel {
  double factor1 = 1.0;  // A = radius₁²
  double factor2 = 1.0;  // B = radius₂²
  double eps = 0.0;
  PerturbationPotential phi = PerturbationPotential::None;

  static constexpr int chart_count = 4;
  ChartDomain domain() const { return ChartDomain::Bidisk; }

  // q(s) = s/(1+s) on the z-chart and 1 - q on the w-chart for the height
  // function |z|²/(1+|z|²); returns value, first and second s-derivative.
  template <typename T>
  static void height(bool south, const T& s, T& f, T& df, T& ddf) {
    const T den = 1.0 + s;
    const T inv = 1.0 / den;
    f = s * inv;
    df = inv * inv;
    ddf = -2.0 * inv * inv * inv;
    if (south) {
      f = 1.0 - f;
      df = -df;
      ddf = -ddf;
    }
  }

  template <typename T>
  RadialPotentialJet<T> potential(int chart, const Vec4<T>& x) const {
    const T s1 = x[0] * x[0] + x[1] * x[1];
    const T s2 = x[2] * x[2] + x[3] * x[3];
    const T i1 = 1.0 / (1.0 + s1);
    const T i2 = 1.0 / (1.0 + s2);
    RadialPotentialJet<T> j;
    j.phi = 2.0 * factor1 * log(1.0 + s1) + 2.0 * factor2 * log(1.0 + s2);
    j.p1 = 2.0 * factor1 * i1;
    j.p2 = 2.0 * factor2 * i2;
    j.p11 = -2.0 * factor1 * i1 * i1;
    j.p22 = -2.0 * factor2 * i2 * i2;
    j.p12 = T(0.0);
    if (phi == PerturbationPotential::HeightProduct && eps != 0.0) {
      T f1, d1, dd1, f2, d2, dd2;
      height((chart >> 1) & 1, s1, f1, d1, dd1);
      height(chart & 1, s2, f2, d2, dd2);
      j.phi = j.phi + eps * f1 * f2;
      j.p1 = j.p1 + eps * d1 * f2;
      j.p2 = j.p2 + eps * f1 * d2;
      j.p11 = j.p11 + eps * dd1 * f2;
      j.p22 = j.p22 + eps * f1 * dd2;
      j.p12 = eps * d1 * d2;
    }
    return j;
  }

  template <typename T>
  Mat4<T> metric(int chart, const Vec4<T>& x) const {
    return kaehler_metric_from_radial(x, potential(chart, x));
  }

  template <typename T>
  std::optional<Vec4<T>> transition(int from, int to, const Vec4<T>& x) const {
    Vec4<T> y = x;
    for (int f = 0; f < 2; ++f) {
      const int bit = 1 - f;  // factor 1 is the high bit
      const bool a = (from >> bit) & 1;
      const bool b = (to >> bit) & 1;
      if (a != b) {
        const Cx<T> z{x[2 * f], x[2 * f + 1]};
        if (value(z.re * z.re + z.im * z.im) < 1e-14) return std::nullopt;
        const Cx<T> w = cinv(z);
        y[2 * f] = w.re;
        y[2 * f + 1] = w.im;
      }
    }
    return y;
  }
};

// Fubini–Study metric on ℂP² with holomorphic sectional curvature 4:
// Φ = ½ log(1 + |z₁|² + |z₂|²) on each affine chart Z_i ≠ 0.
struct FubiniStudyModel {
  static constexpr int chart_count = 3;
  ChartDomain domain() const { return ChartDomain::Bidisk; }

  template <typename T>
  RadialPotentialJet<T> potential(int, const Vec4<T>& x) const {
    const T s = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
    const T inv = 1.0 / (1.0 + s);
    RadialPotentialJet<T> j;
    j.phi = 0.5 * log(1.0 + s);
    j.p1 = 0.5 * inv;
    j.p2 = 0.5 * inv;
    j.p11 = -0.5 * inv * inv;
    j.p12 = j.p11;
    j.p22 = j.p11;
    return j;
  }

  template <typename T>
  Mat4<T> metric(int chart, const Vec4<T>& x) const {
    return kaehler_metric_from_radial(x, potential(chart, x));
  }

  template <typename T>
  std::optional<Vec4<T>> transition(int from, int to, const Vec4<T>& x) const {
    if (from == to) return x;
    // homogeneous coordinates with Z_from = 1
    Cx<T> hom[3];
    int k = 0;
    for (int i = 0; i < 3; ++i) {
      if (i == from) {
        hom[i] = {T(1.0), T(0.0)};
      } else {
        hom[i] = {x[2 * k], x[2 * k + 1]};
        ++k;
      }
    }
    if (value(hom[to].re * hom[to].re + hom[to].im * hom[to].im) < 1e-14) return std::nullopt;
    Vec4<T> y;
    k = 0;
    for (int i = 0; i < 3; ++i) {
      if (i == to) continue;
      const Cx<T> w = cdiv(hom[i], hom[to]);
      y[2 * k] = w.re;
      y[2 * k + 1] = w.im;
      ++k;
    }
    return y;
  }
};

using MetricModel = std::variant<FlatModel, RoundSphereModel, KaehlerProductModel, FubiniStudyModel>;

}  // namespace curv4
