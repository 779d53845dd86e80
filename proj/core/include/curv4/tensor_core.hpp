#pragma once

// Frame-level multilinear algebra on a 4-dimensional oriented inner product
// space: bivectors, the Hodge star on Λ², the η-basis of Λ²₊ ⊕ Λ²₋ and the
// Kulkarni–Nomizu product. Everything here assumes a positively oriented
// orthonormal frame; no metric enters.

#include <Eigen/Dense>

#include <array>
#include <utility>

namespace curv4 {

using Vector4 = Eigen::Vector4d;
using Matrix4 = Eigen::Matrix4d;
using Bivector6 = Eigen::Matrix<double, 6, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Matrix3 = Eigen::Matrix3d;
using Vector3 = Eigen::Vector3d;

// Symmetric 4x4 form (metric, Ricci). Symmetry is enforced by `symmetrized`.
using SymBilinear4 = Eigen::Matrix4d;

// Curvature-type tensor stored as a symmetric operator on Λ² in the basis
// {e12, e13, e14, e23, e24, e34}.
using CurvatureLike = Matrix6;

// Ordered index pairs (i<j) of the bivector basis.
inline constexpr std::array<std::pair<int, int>, 6> kBivectorPairs{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

// Position of e_i ∧ e_j in the basis together with the sign of the
// reordering; sign 0 when i == j.
struct PairIndex {
  int index;
  int sign;
};
PairIndex pair_index(int i, int j);

Bivector6 basis_bivector(int i, int j);

Bivector6 wedge(const Vector4& u, const Vector4& v);

// Determinant inner product: <X∧Y, U∧V> = <X,U><Y,V> - <X,V><Y,U>, which in
// the pair basis is the Euclidean dot product.
double inner(const Bivector6& a, const Bivector6& b);

Bivector6 hodge_star(const Bivector6& xi);

// Matrix of * in the pair basis.
const Matrix6& hodge_star_matrix();

struct EtaBasis {
  std::array<Bivector6, 3> plus;   // η₁, η₂, η₃ (self-dual)
  std::array<Bivector6, 3> minus;  // η̄₁, η̄₂, η̄₃ (anti-self-dual)
};

EtaBasis eta_basis();

// Orthogonal change of basis whose columns are η₁/√2, η₂/√2, η₃/√2,
// η̄₁/√2, η̄₂/√2, η̄₃/√2. P^T R P gives the (Λ²₊, Λ²₋) block form.
const Matrix6& eta_change_of_basis();

// (B ⊘ g) with the half-sum-of-determinants normalization, evaluated in an
// orthonormal frame for g (so g enters as the given matrix).
CurvatureLike kulkarni_nomizu(const SymBilinear4& b, const SymBilinear4& g);

// <ξ, *ξ>; vanishes exactly on decomposable bivectors.
double plucker_residual(const Bivector6& xi);

// Full 4-index evaluation R(a,b,c,d) of a curvature-like operator.
double component(const CurvatureLike& r, int a, int b, int c, int d);

// |R_1234 + R_1342 + R_1423| and the analogous sums over all index choices
// (max abs).
double first_bianchi_residual(const CurvatureLike& r);

// Largest deviation from R(a,b,c,d) = -R(b,a,c,d) = R(c,d,a,b) etc; the
// operator form makes antisymmetry exact, so only pair symmetry is checked.
double pair_symmetry_residual(const CurvatureLike& r);

// Ricci contraction Ric(a,b) = Σ_k R(a,k,b,k).
SymBilinear4 ricci_contraction(const CurvatureLike& r);

}  // namespace curv4
