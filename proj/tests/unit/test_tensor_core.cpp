#include "curv4/dual.hpp"
#include "curv4/tensor_core.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace curv4;

namespace {

Vector4 random_vec(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return Vector4(g(rng), g(rng), g(rng), g(rng));
}

}  // namespace

TEST(Dual, SecondDerivativesMatchFiniteDifferences) {
  auto f = [](const auto& x, const auto& y) { return sin(x * y) + exp(x) / (1.0 + y * y) + sqrt(2.0 + x * x); };
  const double x0 = 0.3, y0 = -0.7;
  using S = Dual<Dual<double, 2>, 2>;
  const S x(Dual<double, 2>(x0, {1.0, 0.0}), {Dual<double, 2>(1.0), Dual<double, 2>(0.0)});
  const S y(Dual<double, 2>(y0, {0.0, 1.0}), {Dual<double, 2>(0.0), Dual<double, 2>(1.0)});
  const S r = f(x, y);
  const double h = 1e-4;
  auto fd = [&](double a, double b) { return f(a, b); };
  EXPECT_NEAR(r.v.v, fd(x0, y0), 1e-15);
  EXPECT_NEAR(r.v.d[0], (fd(x0 + h, y0) - fd(x0 - h, y0)) / (2 * h), 1e-7);
  EXPECT_NEAR(r.v.d[1], (fd(x0, y0 + h) - fd(x0, y0 - h)) / (2 * h), 1e-7);
  const double fxy = (fd(x0 + h, y0 + h) - fd(x0 + h, y0 - h) - fd(x0 - h, y0 + h) + fd(x0 - h, y0 - h)) / (4 * h * h);
  EXPECT_NEAR(r.d[0].d[1], fxy, 1e-6);
  EXPECT_NEAR(r.d[1].d[0], fxy, 1e-6);
  const double fxx = (fd(x0 + h, y0) - 2 * fd(x0, y0) + fd(x0 - h, y0)) / (h * h);
  EXPECT_NEAR(r.d[0].d[0], fxx, 1e-5);
}

TEST(Bivectors, WedgeRespectsPairOrderAndSign) {
  const Vector4 e1 = Vector4::Unit(0), e3 = Vector4::Unit(2);
  const Bivector6 a = wedge(e1, e3);
  EXPECT_EQ(a, basis_bivector(0, 2));
  EXPECT_EQ(wedge(e3, e1), -a);
  EXPECT_EQ(pair_index(2, 0).sign, -1);
  EXPECT_EQ(pair_index(1, 1).sign, 0);
}

TEST(Bivectors, InnerProductIsDeterminant) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 100; ++k) {
    const Vector4 x = random_vec(rng), y = random_vec(rng), u = random_vec(rng), v = random_vec(rng);
    EXPECT_NEAR(inner(wedge(x, y), wedge(u, v)), x.dot(u) * y.dot(v) - x.dot(v) * y.dot(u), 1e-12);
  }
}

TEST(Hodge, IsAnIsometricInvolution) {
  const Matrix6& s = hodge_star_matrix();
  EXPECT_LT((s * s - Matrix6::Identity()).norm(), 1e-15);
  EXPECT_LT((s.transpose() * s - Matrix6::Identity()).norm(), 1e-15);
  EXPECT_EQ(hodge_star(basis_bivector(0, 1)), basis_bivector(2, 3));
}

TEST(Hodge, EtaBasisSplitsIntoEigenspaces) {
  const EtaBasis eb = eta_basis();
  for (int k = 0; k < 3; ++k) {
    EXPECT_LT((hodge_star(eb.plus[k]) - eb.plus[k]).norm(), 1e-15);
    EXPECT_LT((hodge_star(eb.minus[k]) + eb.minus[k]).norm(), 1e-15);
  }
  const Matrix6& p = eta_change_of_basis();
  EXPECT_LT((p.transpose() * p - Matrix6::Identity()).norm(), 1e-14);
}

TEST(Plucker, VanishesExactlyOnDecomposables) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 100; ++k) EXPECT_NEAR(plucker_residual(wedge(random_vec(rng), random_vec(rng))), 0.0, 1e-12);
  const Bivector6 kaehler = basis_bivector(0, 1) + basis_bivector(2, 3);
  EXPECT_NEAR(plucker_residual(kaehler), 2.0, 1e-15);
}

TEST(KulkarniNomizu, MetricSquareIsIdentityOnBivectors) {
  EXPECT_LT((kulkarni_nomizu(Matrix4::Identity(), Matrix4::Identity()) - Matrix6::Identity()).norm(), 1e-15);
}

TEST(KulkarniNomizu, ProductSatisfiesCurvatureSymmetries) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  Matrix4 b = Matrix4::NullaryExpr([&](Eigen::Index, Eigen::Index) { return g(rng); });
  b = (0.5 * (b + b.transpose())).eval();
  const CurvatureLike r = kulkarni_nomizu(b, Matrix4::Identity());
  EXPECT_LT(first_bianchi_residual(r), 1e-14);
  EXPECT_LT(pair_symmetry_residual(r), 1e-15);
  // Ric(B ⊘ g) = ½((tr B) g + 2B)
  const Matrix4 ric = ricci_contraction(r);
  EXPECT_LT((ric - 0.5 * (b.trace() * Matrix4::Identity() + 2.0 * b)).norm(), 1e-13);
}

TEST(Component, AntisymmetryAndPairSymmetry) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g;
  Matrix6 r = Matrix6::NullaryExpr([&](Eigen::Index, Eigen::Index) { return g(rng); });
  r = (0.5 * (r + r.transpose())).eval();
  EXPECT_DOUBLE_EQ(component(r, 0, 2, 1, 3), -component(r, 2, 0, 1, 3));
  EXPECT_DOUBLE_EQ(component(r, 0, 2, 1, 3), -component(r, 0, 2, 3, 1));
  EXPECT_DOUBLE_EQ(component(r, 0, 2, 1, 3), component(r, 1, 3, 0, 2));
  EXPECT_DOUBLE_EQ(component(r, 1, 1, 2, 3), 0.0);
}
