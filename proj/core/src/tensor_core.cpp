#include "curv4/tensor_core.hpp"

#include <algorithm>
#include <cmath>

namespace curv4 {

PairIndex pair_index(int i, int j) {
  if (i == j) return {0, 0};
  int sign = 1;
  if (i > j) {
    std::swap(i, j);
    sign = -1;
  }
  for (int k = 0; k < 6; ++k) {
    if (kBivectorPairs[k].first == i && kBivectorPairs[k].second == j) return {k, sign};
  }
  return {0, 0};
}

Bivector6 basis_bivector(int i, int j) {
  Bivector6 b = Bivector6::Zero();
  const auto p = pair_index(i, j);
  if (p.sign != 0) b[p.index] = p.sign;
  return b;
}

Bivector6 wedge(const Vector4& u, const Vector4& v) {
  Bivector6 b;
  for (int k = 0; k < 6; ++k) {
    const auto [i, j] = kBivectorPairs[k];
    b[k] = u[i] * v[j] - u[j] * v[i];
  }
  return b;
}

double inner(const Bivector6& a, const Bivector6& b) { return a.dot(b); }

const Matrix6& hodge_star_matrix() {
  static const Matrix6 star = [] {
    Matrix6 s = Matrix6::Zero();
    // e12 <-> e34, e13 <-> -e24, e14 <-> e23
    s(5, 0) = 1.0;
    s(0, 5) = 1.0;
    s(4, 1) = -1.0;
    s(1, 4) = -1.0;
    s(3, 2) = 1.0;
    s(2, 3) = 1.0;
    return s;
  }();
  return star;
}

Bivector6 hodge_star(const Bivector6& xi) { return hodge_star_matrix() * xi; }

EtaBasis eta_basis() {
  EtaBasis e;
  const Bivector6 e12 = basis_bivector(0, 1), e13 = basis_bivector(0, 2), e14 = basis_bivector(0, 3);
  const Bivector6 e23 = basis_bivector(1, 2), e24 = basis_bivector(1, 3), e34 = basis_bivector(2, 3);
  e.plus = {e12 + e34, e13 - e24, e14 + e23};
  e.minus = {e12 - e34, e13 + e24, e14 - e23};
  return e;
}

const Matrix6& eta_change_of_basis() {
  static const Matrix6 p = [] {
    const auto e = eta_basis();
    Matrix6 m;
    for (int k = 0; k < 3; ++k) {
      m.col(k) = e.plus[k] / std::sqrt(2.0);
      m.col(k + 3) = e.minus[k] / std::sqrt(2.0);
    }
    return m;
  }();
  return p;
}

namespace {

double kn_entry(const SymBilinear4& b, const SymBilinear4& g, int x, int y, int v, int w) {
  const double d1 = g(x, v) * b(y, w) - g(x, w) * b(y, v);
  const double d2 = b(x, v) * g(y, w) - b(x, w) * g(y, v);
  return 0.5 * (d1 + d2);
}

}  // namespace

CurvatureLike kulkarni_nomizu(const SymBilinear4& b, const SymBilinear4& g) {
  CurvatureLike r;
  for (int p = 0; p < 6; ++p) {
    for (int q = 0; q < 6; ++q) {
      const auto [x, y] = kBivectorPairs[p];
      const auto [v, w] = kBivectorPairs[q];
      r(p, q) = kn_entry(b, g, x, y, v, w);
    }
  }
  return r;
}

double plucker_residual(const Bivector6& xi) { return inner(xi, hodge_star(xi)); }

double component(const CurvatureLike& r, int a, int b, int c, int d) {
  const auto p = pair_index(a, b);
  const auto q = pair_index(c, d);
  if (p.sign == 0 || q.sign == 0) return 0.0;
  return p.sign * q.sign * r(p.index, q.index);
}

double first_bianchi_residual(const CurvatureLike& r) {
  double worst = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          const double s = component(r, a, b, c, d) + component(r, a, c, d, b) +
                           component(r, a, d, b, c);
          worst = std::max(worst, std::abs(s));
        }
  return worst;
}

double pair_symmetry_residual(const CurvatureLike& r) {
  return (r - r.transpose()).cwiseAbs().maxCoeff();
}

SymBilinear4 ricci_contraction(const CurvatureLike& r) {
  SymBilinear4 ric = SymBilinear4::Zero();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int k = 0; k < 4; ++k) ric(a, b) += component(r, a, k, b, k);
  return ric;
}

}  // namespace curv4
