#include "curv4/metric_library.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace curv4;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<MetricField> builtins() {
  return {flat_metric(), round_sphere4(1.0), product_spheres(1.0, 1.0), ht_metric(0.5), twisted_metric(0.4, 0.3),
          fubini_study()};
}

}  // namespace

TEST(MetricLibrary, JetsMatchFiniteDifferences) {
  for (const auto& m : builtins()) {
    const auto pts = random_points(m, 5, 21);
    for (const auto& p : pts) {
      const MetricJets j = m.jets(p.chart, p.x);
      const double h = 1e-5;
      for (int k = 0; k < 4; ++k) {
        Point4 a = p.x, b = p.x;
        a[k] += h;
        b[k] -= h;
        const Matrix4 fd = (m.eval(p.chart, a) - m.eval(p.chart, b)) / (2 * h);
        EXPECT_LT((fd - j.dg[k]).cwiseAbs().maxCoeff(), 1e-7) << m.name();
        const Matrix4 fd2 = (m.deriv1(p.chart, a)[k] - m.deriv1(p.chart, b)[k]) / (2 * h);
        EXPECT_LT((fd2 - j.ddg[k][k]).cwiseAbs().maxCoeff(), 1e-6) << m.name();
      }
    }
  }
}

TEST(MetricLibrary, ChartOverlapsPullBackTheMetric) {
  for (const auto& m : builtins()) {
    int checked = 0;
    const auto pts = random_points(m, 200, 4);
    for (const auto& p : pts) {
      for (const auto& c : m.atlas()) {
        if (c.id == p.chart) continue;
        const auto q = m.transition(p.chart, c.id, p.x);
        if (!q) continue;
        const auto jac = m.transition_jacobian(p.chart, c.id, p.x);
        ASSERT_TRUE(jac.has_value());
        const Matrix4 pulled = jac->transpose() * m.eval(c.id, *q) * *jac;
        const Matrix4 g = m.eval(p.chart, p.x);
        EXPECT_LT((pulled - g).norm() / g.norm(), 1e-10) << m.name() << " " << p.chart << "->" << c.id;
        ++checked;
      }
    }
    if (m.atlas().size() > 1) {
      EXPECT_GT(checked, 0) << m.name();
    }
  }
}

TEST(MetricLibrary, MetricsArePositiveDefinite) {
  for (const auto& m : builtins())
    for (const auto& p : random_points(m, 100, 8)) {
      Eigen::SelfAdjointEigenSolver<Matrix4> es(m.eval(p.chart, p.x));
      EXPECT_GT(es.eigenvalues()[0], 0.0) << m.name();
    }
}

TEST(MetricLibrary, KaehlerStructuresAreParallel) {
  for (const auto& m : {product_spheres(1.0, 1.0), ht_metric(0.7), twisted_metric(0.2, 0.5), fubini_study()}) {
    ASSERT_TRUE(m.is_kaehler());
    const KaehlerResiduals r = kaehler_residuals(m, random_points(m, 30, 9));
    EXPECT_LT(r.j_squared, 1e-12) << m.name();
    EXPECT_LT(r.compatibility, 1e-10) << m.name();
    EXPECT_LT(r.parallel, 1e-8) << m.name();
  }
  EXPECT_FALSE(round_sphere4(1.0).is_kaehler());
}

TEST(MetricLibrary, VolumesOfModelSpaces) {
  EXPECT_NEAR(volume(round_sphere4(1.0)) / (8.0 * kPi * kPi / 3.0), 1.0, 1e-6);
  EXPECT_NEAR(volume(round_sphere4(2.0)) / (16.0 * 8.0 * kPi * kPi / 3.0), 1.0, 1e-6);
  EXPECT_NEAR(volume(product_spheres(1.0, 1.0)) / (16.0 * kPi * kPi), 1.0, 1e-6);
  EXPECT_NEAR(volume(fubini_study()) / (kPi * kPi / 2.0), 1.0, 1e-6);
}

TEST(MetricLibrary, TwistedFamilyKeepsVolume) {
  for (double t : {0.0, 0.5, 1.0})
    for (double eps : {0.0, 0.3, 0.8})
      EXPECT_NEAR(volume(twisted_metric(t, eps)) / (16.0 * kPi * kPi), 1.0, 1e-3) << t << " " << eps;
}

TEST(MetricLibrary, TwistedFamilyRejectsDegenerateEps) {
  const double lim = twisted_eps_max(0.5);
  EXPECT_GT(lim, 0.0);
  EXPECT_THROW(twisted_metric(0.5, 1.01 * lim), GeometryError);
  EXPECT_NO_THROW(twisted_metric(0.5, 0.5 * lim));
}

TEST(MetricLibrary, SpecGrammar) {
  EXPECT_EQ(parse_metric_spec("round4(r=2)").name(), "round4");
  EXPECT_DOUBLE_EQ(parse_metric_spec("product(a=1,b=2)").parameters().at("b"), 2.0);
  EXPECT_EQ(parse_metric_spec("twisted(t=0.3,eps=0.005)").name(), "twisted");
  EXPECT_EQ(parse_metric_spec("fubini-study").name(), "fubini-study");
  EXPECT_THROW(parse_metric_spec("round4(r=-1)"), SpecError);
  EXPECT_THROW(parse_metric_spec("round4(q=1)"), SpecError);
  EXPECT_THROW(parse_metric_spec("nonsense"), SpecError);
  EXPECT_THROW(parse_metric_spec("product(a=x)"), SpecError);
  EXPECT_THROW(parse_metric_spec("ht(t=2)"), SpecError);
}

TEST(MetricLibrary, GridsAreDeterministic) {
  const MetricField m = product_spheres(1.0, 1.0);
  EXPECT_EQ(lattice_grid(m, 8).size(), m.atlas().size() * 4096);
  const auto a = random_points(m, 50, 1), b = random_points(m, 50, 1);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].chart, b[k].chart);
    EXPECT_EQ(a[k].x, b[k].x);
  }
}
