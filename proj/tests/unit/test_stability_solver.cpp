#include "curv4/stability_solver.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace curv4;

namespace {

constexpr double kPi = std::numbers::pi;

IndexForm index_of(const SurfaceImmersion& s, const MetricField& m, int degree, int threads = 1) {
  IndexOptions opt;
  opt.threads = threads;
  return assemble_index_form(sample_surface(s, m), SectionBasis(s, degree), opt);
}

int count_near(const Eigen::VectorXd& x, double value, double tol) {
  int n = 0;
  for (Eigen::Index k = 0; k < x.size(); ++k) n += std::abs(x[k] - value) < tol;
  return n;
}

}  // namespace

TEST(StabilitySolver, EquatorSpectrumAtDegreeFour) {
  const IndexForm f = index_of(equator_s4(), round_sphere4(1.0), 4);
  EXPECT_EQ(f.morse_index, 2);
  EXPECT_EQ(f.nullity, 6);
  EXPECT_EQ(f.rank, 50);
  EXPECT_LT(f.symmetry_residual, 1e-10);
  EXPECT_LT(f.g_condition, 1e6);
  EXPECT_EQ(count_near(f.spectrum, -2.0, 1e-6), 2);
  EXPECT_EQ(count_near(f.spectrum, 0.0, 1e-6), 6);
  EXPECT_EQ(count_near(f.spectrum, 4.0, 1e-6), 10);
  EXPECT_EQ(count_near(f.spectrum, 10.0, 1e-6), 14);
}

TEST(StabilitySolver, EquatorSpectrumAtDegreeEight) {
  const IndexForm f = index_of(equator_s4(), round_sphere4(1.0), 8);
  int start = 0;
  for (int l = 0; l <= 8; ++l) {
    const double expect = l * (l + 1) - 2.0;
    const int mult = 2 * (2 * l + 1);
    for (int k = start; k < start + mult; ++k)
      EXPECT_NEAR(f.spectrum[k], expect, 0.01 * std::max(1.0, std::abs(expect))) << "l=" << l;
    start += mult;
  }
}

TEST(StabilitySolver, SliceAndLineAreStable) {
  const IndexForm slice = index_of(product_slice(1), product_spheres(1.0, 1.0), 4);
  EXPECT_EQ(slice.morse_index, 0);
  EXPECT_GE(slice.nullity, 2);
  EXPECT_NEAR(slice.spectrum[0], 0.0, 1e-8);
  const IndexForm line = index_of(complex_line(), fubini_study(), 4);
  EXPECT_EQ(line.morse_index, 0);
  EXPECT_GT(line.spectrum[0], -line.tol_idx);
}

TEST(StabilitySolver, QuadraticFormMatchesDirectQuadrature) {
  for (const auto& [s, m] : {std::pair{equator_s4(), round_sphere4(1.0)},
                             std::pair{complex_line(), fubini_study()}}) {
    const auto nodes = sample_surface(s, m);
    const SectionBasis basis(s, 2);
    const IndexForm f = assemble_index_form(nodes, basis);
    for (int k = 0; k < basis.size(); ++k) {
      const NormalSection z = basis.section(Eigen::VectorXd::Unit(basis.size(), k));
      EXPECT_NEAR(f.q(k, k), second_variation(nodes, z), 1e-8) << s.name() << " " << k;
    }
    const NormalSection a = basis.section(Eigen::VectorXd::Unit(basis.size(), 1));
    const NormalSection b = basis.section(Eigen::VectorXd::Unit(basis.size(), 5));
    EXPECT_NEAR(f.q(1, 5), second_variation_bilinear(nodes, a, b), 1e-8);
  }
}

TEST(StabilitySolver, AssemblyIsThreadIndependent) {
  const IndexForm a = index_of(complex_line(), fubini_study(), 3, 1);
  const IndexForm b = index_of(complex_line(), fubini_study(), 3, 3);
  EXPECT_EQ((a.q - b.q).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((a.g - b.g).cwiseAbs().maxCoeff(), 0.0);
}

TEST(StabilitySolver, IndexIsMonotoneInDegree) {
  for (const auto& [s, m] : {std::pair{equator_s4(), round_sphere4(1.0)},
                             std::pair{complex_line(), fubini_study()},
                             std::pair{product_slice(1), product_spheres(1.0, 1.0)}}) {
    const auto nodes = sample_surface(s, m);
    int last = -1;
    for (int l : {2, 4, 6, 8}) {
      const int idx = assemble_index_form(nodes, SectionBasis(s, l)).morse_index;
      EXPECT_GE(idx, last) << s.name() << " L=" << l;
      last = idx;
    }
  }
}

TEST(StabilitySolver, NonMinimalSurfaceIsRejected) {
  const SurfaceImmersion s = perturbed_slice(0.2);
  EXPECT_THROW(assemble_index_form(sample_surface(s, product_spheres(1.0, 1.0), {12, 24}), SectionBasis(s, 2)),
               GeometryError);
}

TEST(StabilitySolver, NearHolomorphicSections) {
  {
    const auto nodes = sample_surface(product_slice(1), product_spheres(1.0, 1.0));
    const NearHolomorphic h = near_holomorphic_section(nodes, SectionBasis(product_slice(1), 4));
    EXPECT_LT(h.energy, 1e-8);
    EXPECT_FALSE(h.negative_chern);
    for (const auto& p : nodes) EXPECT_NEAR(section_jet(p, h.sigma).a.norm(), 1.0 / std::sqrt(4 * kPi), 1e-6);
  }
  {
    const auto nodes = sample_surface(equator_s4(), round_sphere4(1.0));
    EXPECT_LT(near_holomorphic_section(nodes, SectionBasis(equator_s4(), 4)).energy, 1e-8);
  }
  {
    const auto nodes = sample_surface(complex_line(), fubini_study());
    const NearHolomorphic h = near_holomorphic_section(nodes, SectionBasis(complex_line(), 8));
    EXPECT_LT(h.energy, 1e-4);
    EXPECT_NEAR(h.chern_number, 1.0, 1e-3);
  }
}

TEST(StabilitySolver, NearHolomorphicSectionOnPerturbedSlice) {
  // Non-minimal test immersion: the ∂̄ pencil needs no minimality.
  const SurfaceImmersion s = perturbed_slice(0.2);
  const auto nodes = sample_surface(s, product_spheres(1.0, 1.0));
  const SectionBasis basis(s, 8);
  IndexOptions opt;
  opt.require_minimal = false;
  const NearHolomorphic h = near_holomorphic_section(assemble_index_form(nodes, basis, opt), nodes, basis);
  EXPECT_LT(h.energy, 1e-6);
  EXPECT_LT(log_norm_check(nodes, h.sigma, false).residual, 1e-3);
}

TEST(StabilitySolver, RefinementStabilizes) {
  auto run = [](const SurfaceImmersion& s, const MetricField& m) {
    const auto nodes = sample_surface(s, m);
    return refine_until_stable([&](int l) { return assemble_index_form(nodes, SectionBasis(s, l)); }, 2, 10);
  };
  const RefinementResult eq = run(equator_s4(), round_sphere4(1.0));
  EXPECT_EQ(eq.morse_index, 2);
  EXPECT_LE(eq.degree_used, 4);
  const RefinementResult sl = run(product_slice(1), product_spheres(1.0, 1.0));
  EXPECT_EQ(sl.morse_index, 0);
  EXPECT_LE(sl.degree_used, 4);
  const RefinementResult cp = run(complex_line(), fubini_study());
  EXPECT_EQ(cp.morse_index, 0);
  EXPECT_LE(cp.degree_used, 6);
  EXPECT_EQ(cp.history.back().degree, cp.degree_used);
}

TEST(StabilitySolver, RefinementFailures) {
  auto drifting = [](int l) {
    IndexForm f;
    f.morse_index = l;
    return f;
  };
  EXPECT_THROW(refine_until_stable(drifting, 2, 8), GeometryError);
  EXPECT_THROW(refine_until_stable(drifting, 8, 8), SpecError);
}

TEST(StabilitySolver, SyntheticPositiveCurvatureFixture) {
  for (double kappa : {0.5, 1.0}) {
    const SyntheticFixtureReport r = synthetic_theorem_c_fixture(kappa, 4);
    EXPECT_NEAR(r.area, 4 * kPi, 1e-9);
    EXPECT_NEAR(r.delta2_parallel, -2 * kappa * 4 * kPi, 1e-6);
    EXPECT_LT(r.pair_sum, 0.0);
    EXPECT_LT(r.delta2_plus, 0.0);
    EXPECT_LT(r.delta2_minus, 0.0);
    EXPECT_GE(r.pair_index, 2);
    EXPECT_GE(r.morse_index, 2);
  }
}

TEST(StabilitySolver, HarnessOnProductMetrics) {
  for (const MetricField& m : {product_spheres(1.0, 1.0), ht_metric(0.5)}) {
    const TheoremCReport r = theorem_c_harness(m, product_slice(1), 4);
    ASSERT_FALSE(r.refused) << m.name();
    EXPECT_NEAR(r.chern_number, 0.0, 1e-4);
    EXPECT_NEAR(r.sum, 0.0, 1e-8);
    EXPECT_LT(r.identity_residual, 1e-4);
    EXPECT_NEAR(r.dbar_term - r.pairing_term - r.a_wedge_a_term, r.sum, 1e-4);
    EXPECT_TRUE(r.hypothesis_pairing);
    EXPECT_TRUE(r.hypothesis_geodesic);
    EXPECT_FALSE(r.hypothesis_positive_k);
    EXPECT_NEAR(r.min_sectional, 0.0, 1e-8);
    EXPECT_EQ(r.verdict.rfind("no contradiction", 0), 0u) << r.verdict;
  }
}

TEST(StabilitySolver, HarnessRefusesNonMinimalSlice) {
  const TheoremCReport r = theorem_c_harness(product_spheres(1.0, 1.0), perturbed_slice(0.2), 2, {12, 24});
  EXPECT_TRUE(r.refused);
  EXPECT_GT(r.minimality_residual, 1e-3);
  EXPECT_THROW(theorem_c_harness(round_sphere4(1.0), equator_s4(), 2), SpecError);
}
