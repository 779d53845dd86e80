#include "curv4/curvature_engine.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace curv4;

namespace {

std::vector<MetricField> builtins() {
  return {flat_metric(), round_sphere4(1.0), product_spheres(1.0, 1.0), ht_metric(0.3), twisted_metric(0.6, 0.4),
          fubini_study()};
}

Vector4 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vector4 v(g(rng), g(rng), g(rng), g(rng));
  return v.normalized();
}

}  // namespace

TEST(CurvatureEngine, FlatSpaceHasNoCurvature) {
  const MetricField m = flat_metric();
  for (const auto& p : random_points(m, 20, 1)) {
    const CurvatureFrameData c = riemann_at(m, p.chart, p.x);
    EXPECT_LT(c.riemann.cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(CurvatureEngine, RoundSphereIsConstantCurvature) {
  for (double r : {1.0, 2.0}) {
    const MetricField m = round_sphere4(r);
    const double k = 1.0 / (r * r);
    for (const auto& p : random_points(m, 20, 2)) {
      const CurvatureFrameData c = riemann_at(m, p.chart, p.x);
      EXPECT_NEAR(c.s, 12.0 * k, 1e-9);
      EXPECT_LT(c.w_plus.norm() + c.w_minus.norm(), 1e-9);
      EXPECT_LT((c.riemann - k * Matrix6::Identity()).cwiseAbs().maxCoeff(), 1e-9);
      EXPECT_NEAR(min_sectional_curvature(c).value, k, 1e-8);
      EXPECT_NEAR(max_sectional_curvature(c), k, 1e-8);
    }
  }
}

TEST(CurvatureEngine, ProductOfUnitSpheres) {
  const MetricField m = product_spheres(1.0, 1.0);
  for (const auto& p : random_points(m, 20, 3)) {
    const CurvatureFrameData c = riemann_at(m, p.chart, p.x);
    EXPECT_NEAR(c.s, 4.0, 1e-9);
    const Vector3 w = sorted_eigenvalues(c.w_plus);
    EXPECT_NEAR(w[0], -1.0 / 3.0, 1e-9);
    EXPECT_NEAR(w[1], -1.0 / 3.0, 1e-9);
    EXPECT_NEAR(w[2], 2.0 / 3.0, 1e-9);
    const Vector3 g = sorted_eigenvalues(c.s / 6.0 * Matrix3::Identity() - c.w_plus);
    EXPECT_NEAR(g[0], 0.0, 1e-9);
    EXPECT_NEAR(g[1], 1.0, 1e-9);
    EXPECT_NEAR(g[2], 1.0, 1e-9);
    EXPECT_NEAR(min_sectional_curvature(c).value, 0.0, 1e-8);
    EXPECT_NEAR(max_sectional_curvature(c), 1.0, 1e-8);
    Eigen::SelfAdjointEigenSolver<Matrix6> es(c.r_op);
    EXPECT_GE(es.eigenvalues()[0], -1e-9);
  }
}

TEST(CurvatureEngine, FubiniStudyIsKaehlerEinstein) {
  const MetricField m = fubini_study();
  for (const auto& p : random_points(m, 20, 4)) {
    const CurvatureFrameData c = riemann_at(m, p.chart, p.x);
    EXPECT_NEAR(c.s, 24.0, 1e-8);
    EXPECT_LT((c.ric - 6.0 * Matrix4::Identity()).norm(), 1e-8);
    const Vector3 w = sorted_eigenvalues(c.w_plus) / (c.s / 6.0);
    EXPECT_NEAR(w[0], -0.5, 1e-9);
    EXPECT_NEAR(w[1], -0.5, 1e-9);
    EXPECT_NEAR(w[2], 1.0, 1e-9);
    EXPECT_LT(c.w_minus.norm(), 1e-8);
    EXPECT_NEAR(min_sectional_curvature(c).value, 1.0, 1e-7);
    EXPECT_NEAR(max_sectional_curvature(c), 4.0, 1e-7);
  }
}

TEST(CurvatureEngine, FubiniStudyHolomorphicCurvature) {
  const MetricField m = fubini_study();
  std::mt19937_64 rng(17);
  for (const auto& p : random_points(m, 10, 5)) {
    const CurvatureFrameData c = riemann_at(m, p.chart, p.x);
    const Matrix4 j = frame_complex_structure(c, m.kaehler()->complex_structure(p.chart, p.x));
    EXPECT_LT((j * j + Matrix4::Identity()).norm(), 1e-10);
    const Vector4 x = random_unit(rng), y = random_unit(rng);
    EXPECT_NEAR(holomorphic_bisectional(c, j, x, x), 4.0, 1e-8);
    // Bisectional curvature 2(1 + ⟨x,y⟩² + ⟨x,Jy⟩²) for unit x, y.
    const double expect = 2.0 * (1.0 + std::pow(x.dot(y), 2) + std::pow(x.dot(j * y), 2));
    EXPECT_NEAR(holomorphic_bisectional(c, j, x, y), expect, 1e-8);
  }
}

TEST(CurvatureEngine, KaehlerCurvatureIsJInvariant) {
  for (const auto& m : {ht_metric(0.8), twisted_metric(0.3, 0.6), fubini_study()}) {
    std::mt19937_64 rng(19);
    for (const auto& p : random_points(m, 10, 6)) {
      const CurvatureFrameData c = riemann_at(m, p.chart, p.x);
      const Matrix4 j = frame_complex_structure(c, m.kaehler()->complex_structure(p.chart, p.x));
      const Vector4 a = random_unit(rng), b = random_unit(rng), u = random_unit(rng), v = random_unit(rng);
      EXPECT_NEAR(curvature4(c.riemann, j * a, j * b, u, v), curvature4(c.riemann, a, b, u, v), 1e-8) << m.name();
    }
  }
}

TEST(CurvatureEngine, DecompositionReconstructsAndIsTraceFree) {
  for (const auto& m : builtins()) {
    for (const auto& p : random_points(m, 20, 7)) {
      const CurvatureFrameData c = riemann_at(m, p.chart, p.x);
      const Decomposition d = decompose(c);
      EXPECT_LT(d.reconstruction_residual, 1e-10) << m.name();
      EXPECT_LT(ricci_contraction(d.weyl).cwiseAbs().maxCoeff(), 1e-10) << m.name();
      EXPECT_LT(std::abs(c.w_plus.trace()) + std::abs(c.w_minus.trace()), 1e-10) << m.name();
      EXPECT_LT(block_identity_residual(c), 1e-10) << m.name();
      EXPECT_LT(first_bianchi_residual(c.riemann), 1e-10) << m.name();
    }
  }
}

TEST(CurvatureEngine, DecompositionCoefficientsMatchScalarBlock) {
  const DecompositionCoefficients& k = decomposition_coefficients();
  const MetricField m = round_sphere4(1.0);
  const CurvatureFrameData c = riemann_at(m, 0, {0.1, 0.2, -0.3, 0.05});
  // Constant curvature: R = (scalar · s) g⊘g with g⊘g the identity on Λ².
  EXPECT_NEAR(k.scalar * c.s, 1.0, 1e-10);
  EXPECT_GT(k.ricci, 0.0);
}

TEST(CurvatureEngine, ScalarCurvatureIsChartIndependent) {
  for (const auto& m : builtins()) {
    for (const auto& p : random_points(m, 100, 8)) {
      for (const auto& ch : m.atlas()) {
        if (ch.id == p.chart) continue;
        const auto q = m.transition(p.chart, ch.id, p.x);
        if (!q) continue;
        const CurvatureFrameData a = riemann_at(m, p.chart, p.x);
        const CurvatureFrameData b = riemann_at(m, ch.id, *q);
        EXPECT_NEAR(a.s, b.s, 1e-8 * (1.0 + std::abs(a.s))) << m.name();
        EXPECT_NEAR(sorted_eigenvalues(a.w_plus)[0], sorted_eigenvalues(b.w_plus)[0], 1e-8) << m.name();
      }
    }
  }
}

TEST(CurvatureEngine, SectionalMinimizerBeatsRandomPlanes) {
  const MetricField m = twisted_metric(0.5, 0.7);
  std::mt19937_64 rng(23);
  for (const auto& p : random_points(m, 3, 9)) {
    const CurvatureFrameData c = riemann_at(m, p.chart, p.x);
    const SectionalMinimum mn = min_sectional_curvature(c);
    EXPECT_NEAR(plucker_residual(mn.plane), 0.0, 1e-10);
    EXPECT_NEAR(mn.plane.norm(), 1.0, 1e-10);
    EXPECT_NEAR(mn.plane.dot(c.riemann * mn.plane), mn.value, 1e-10);
    double sampled = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 10000; ++k) {
      const Vector4 x = random_unit(rng);
      Vector4 y = random_unit(rng);
      y = (y - y.dot(x) * x).normalized();
      const Bivector6 xi = wedge(x, y);
      sampled = std::min(sampled, xi.dot(c.riemann * xi));
    }
    EXPECT_LE(mn.value, sampled + 1e-10);
    EXPECT_GT(mn.value, sampled - 0.1 * (1.0 + std::abs(sampled)));
  }
}

TEST(CurvatureEngine, SelfDualImplicationOnSyntheticSpectra) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int antecedent = 0;
  for (int k = 0; k < 100000; ++k) {
    const double s = -6.0 + 36.0 * u(rng);
    const double span = std::max(std::abs(s), 1.0) * 0.3;
    const double w1 = -s / 12.0 + span * (u(rng) - 0.3);
    const double w2 = w1 + span * u(rng);
    const Matrix3 w = Vector3(w1, w2, -w1 - w2).asDiagonal();
    const Lemma21Record r = lemma21_check(s, w, tol_psd(s));
    if (r.antecedent) {
      ++antecedent;
      ASSERT_GE(r.consequent_margin, -1e-9) << "s=" << s << " w=" << w1 << "," << w2;
    }
  }
  EXPECT_GT(antecedent, 10000);
}

TEST(CurvatureEngine, SelfDualImplicationBoundaryCase) {
  const double lambda = 0.7;
  const Matrix3 w = Vector3(2 * lambda, -lambda, -lambda).asDiagonal();
  const Lemma21Record r = lemma21_check(12.0 * lambda, w, 1e-12);
  EXPECT_NEAR(r.antecedent_margin, 0.0, 1e-14);
  EXPECT_NEAR(r.consequent_margin, 0.0, 1e-14);
  EXPECT_TRUE(r.antecedent);
  EXPECT_FALSE(r.violation);
}

TEST(CurvatureEngine, ConditionCheckIsThreadIndependent) {
  const MetricField m = twisted_metric(0.5, 0.9);
  const auto grid = random_points(m, 64, 10);
  SectionalOptions opt;
  opt.starts = 4;
  const ConditionReport a = condition_check(m, grid, 1, nullptr, opt);
  const ConditionReport b = condition_check(m, grid, 4, nullptr, opt);
  EXPECT_EQ(a.s6_minus_wplus.value, b.s6_minus_wplus.value);
  EXPECT_EQ(a.min_sectional.value, b.min_sectional.value);
  EXPECT_EQ(a.min_s, b.min_s);
  std::vector<PointMargins> rec;
  const ConditionReport c = condition_check(m, grid, 2, &rec, opt);
  const ConditionReport d = aggregate_margins(rec);
  EXPECT_EQ(c.r_op.value, d.r_op.value);
  EXPECT_EQ(rec.size(), grid.size());
}

TEST(CurvatureEngine, WeitzenboeckOnGenericForms) {
  for (const auto& m : {flat_metric(), round_sphere4(1.0), product_spheres(1.0, 1.0)}) {
    for (unsigned f = 0; f < 5; ++f) {
      const TwoFormField alpha = trigonometric_two_form(random_trig_two_form(100 + f));
      for (const auto& p : random_points(m, 50, 11 + f))
        EXPECT_LT(weitzenboeck_residual(m, alpha, p.chart, p.x).residual, 1e-6) << m.name();
    }
  }
}

TEST(CurvatureEngine, KaehlerFormIsHarmonic) {
  const MetricField m = fubini_study();
  const TwoFormField omega = kaehler_form_field(m);
  for (const auto& p : random_points(m, 10, 12)) {
    const WeitzenboeckTerms t = weitzenboeck_residual(m, omega, p.chart, p.x);
    EXPECT_LT(t.hodge_laplacian.norm(), 1e-7);
    EXPECT_LT(t.rough_laplacian.norm(), 1e-7);
    EXPECT_LT(t.residual, 1e-7);
  }
  EXPECT_THROW(kaehler_form_field(round_sphere4(1.0)), SpecError);
}
