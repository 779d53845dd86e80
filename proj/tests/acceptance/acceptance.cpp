// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "identities.hpp"
#include "reports.hpp"

#include "curv4/stability_solver.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numbers>
#include <sstream>
#include <string>

using namespace curv4;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kPoints = 200;
constexpr unsigned kSeed = 2024;

struct Tally {
  int failed = 0;
  void report(int id, bool pass, const std::string& what, const std::string& detail) {
    std::printf("criterion %2d %s  %s  [%s]\n", id, pass ? "PASS" : "FAIL", what.c_str(), detail.c_str());
    std::fflush(stdout);
    failed += !pass;
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<MetricField> builtins() {
  return {flat_metric(),   round_sphere4(1.0),       product_spheres(1.0, 1.0), ht_metric(0.5),
          ht_metric(0.0),  twisted_metric(0.5, 0.05), fubini_study()};
}

std::vector<CurvatureFrameData> curvature_samples(const MetricField& m, int n, unsigned seed) {
  std::vector<CurvatureFrameData> out;
  for (const auto& p : random_points(m, n, seed)) out.push_back(riemann_at(m, p.chart, p.x));
  return out;
}

void criterion1(Tally& t) {
  const auto t0 = std::chrono::steady_clock::now();
  double ds = 0, w = 0, dk = 0;
  for (const auto& c : curvature_samples(round_sphere4(1.0), kPoints, kSeed)) {
    ds = std::max(ds, std::abs(c.s - 12.0));
    w = std::max(w, std::sqrt(c.w_plus.squaredNorm() + c.w_minus.squaredNorm()));
    dk = std::max({dk, std::abs(min_sectional_curvature(c).value - 1.0), std::abs(max_sectional_curvature(c) - 1.0)});
  }
  const double secs = seconds_since(t0);
  t.report(1, ds < 1e-6 && w < 1e-8 && dk < 1e-6 && secs < 10.0, "round S4: s = 12, W = 0, K = 1",
           fmt("|s-12| %.2e, |W| %.2e, |K-1| %.2e, %.2f s", ds, w, dk, secs));
}

void criterion2(Tally& t) {
  double ds = 0, dw = 0, dg = 0, dk = 0, rop = 1e300;
  const Vector3 w_expect(-1.0 / 3, -1.0 / 3, 2.0 / 3), g_expect(0, 1, 1);
  for (const auto& c : curvature_samples(product_spheres(1.0, 1.0), kPoints, kSeed + 1)) {
    ds = std::max(ds, std::abs(c.s - 4.0));
    dw = std::max(dw, (sorted_eigenvalues(c.w_plus) - w_expect).cwiseAbs().maxCoeff());
    dg = std::max(dg, (sorted_eigenvalues(c.s / 6.0 * Matrix3::Identity() - c.w_plus) - g_expect).cwiseAbs().maxCoeff());
    dk = std::max(dk, std::abs(min_sectional_curvature(c).value));
    Eigen::SelfAdjointEigenSolver<Matrix6> es(c.r_op);
    rop = std::min(rop, es.eigenvalues()[0]);
  }
  t.report(2, ds < 1e-6 && dw < 1e-6 && dg < 1e-6 && dk < 1e-6 && rop >= -1e-9,
           "S2xS2: s = 4, W+ = {-1/3,-1/3,2/3}, s/6-W+ = {0,1,1}, min K = 0, R >= 0",
           fmt("%.2e %.2e %.2e %.2e, min eig R %.2e", ds, dw, dg, dk, rop));
}

void criterion3(Tally& t) {
  double shape = 0, einstein = 0;
  const Vector3 expect(-0.5, -0.5, 1.0);
  for (const auto& c : curvature_samples(fubini_study(), kPoints, kSeed + 2)) {
    shape = std::max(shape, (sorted_eigenvalues(c.w_plus) / (c.s / 6.0) - expect).cwiseAbs().maxCoeff());
    einstein = std::max(einstein, (c.ric - c.s / 4.0 * Matrix4::Identity()).norm());
  }
  t.report(3, shape < 1e-6 && einstein < 1e-6, "Fubini-Study: W+/(s/6) = {1,-1/2,-1/2}, Einstein",
           fmt("shape %.2e, |Ric - s/4 g| %.2e", shape, einstein));
}

void criterion4(Tally& t) {
  double trace = 0, block = 0;
  for (const auto& m : builtins())
    for (const auto& c : curvature_samples(m, kPoints, kSeed + 3)) {
      trace = std::max({trace, std::abs(c.w_plus.trace()), std::abs(c.w_minus.trace())});
      block = std::max(block, block_identity_residual(c));
    }
  t.report(4, trace < 1e-6 && block < 1e-6, "Weyl traces and curvature-operator blocks",
           fmt("trace %.2e, block %.2e over %zu metrics", trace, block, builtins().size()));
}

void criterion5(Tally& t) {
  const cli::ImplicationSweep sw = cli::self_dual_implication_sweep(100000, kSeed + 4);
  double worst = sw.worst_margin;
  int counter = sw.counterexamples, applicable = sw.antecedent_holds;
  for (const auto& m : builtins())
    for (const auto& c : curvature_samples(m, kPoints, kSeed + 5)) {
      const Lemma21Pair lp = lemma21_check(c);
      for (const auto& r : {lp.plus, lp.minus}) {
        if (!r.antecedent) continue;
        ++applicable;
        worst = std::min(worst, r.consequent_margin);
        counter += r.consequent_margin < -1e-9;
      }
    }
  t.report(5, counter == 0 && worst >= -1e-9, "s/12 + W >= 0 implies s/6 - W >= 0",
           fmt("%d applicable, %d counterexamples, worst margin %.2e", applicable, counter, worst));
}

double independent_margin(const MetricField& m) {
  auto pts = lattice_grid(m, 10);
  const auto extra = random_points(m, 4096, 0xac11u);
  pts.insert(pts.end(), extra.begin(), extra.end());
  SectionalOptions opt;
  opt.enabled = false;
  return condition_check(m, pts, 1, nullptr, opt).s6_minus_wplus.value;
}

void criterion6(Tally& t) {
  const auto t0 = std::chrono::steady_clock::now();
  double vol = 0, margin = 1e300, worst_t = 0;
  int below_construction = 0;
  std::string emp;
  for (int k = 0; k <= 10; ++k) {
    const double tt = k / 10.0;
    const cli::EmpiricalEpsMax e = cli::empirical_eps_max(tt, 8, 1e-6, 1);
    below_construction += e.violated;
    emp += fmt("%s%.3g", k ? "," : "", e.empirical);
    for (double f : {0.0, 0.5, 1.0}) {
      const double eps = f * e.empirical * (f == 1.0 ? 0.999 : 1.0);
      vol = std::max(vol, std::abs(volume(twisted_metric(tt, eps)) / (16 * kPi * kPi) - 1.0));
    }
    for (double f : {0.25, 0.5}) {
      const double mg = independent_margin(twisted_metric(tt, f * e.empirical));
      if (mg < margin) {
        margin = mg;
        worst_t = tt;
      }
    }
  }
  const double secs = seconds_since(t0);
  t.report(6, vol < 1e-3 && margin >= -1e-6 && secs < 600, "twisted family: volume 16 pi^2, s/6 - W+ >= 0 at eps_max/2",
           fmt("max vol err %.2e, min margin %.2e (t=%.1f), empirical eps_max {%s}, %d/11 below construction bound, "
               "%.0f s",
               vol, margin, worst_t, emp.c_str(), below_construction, secs));
}

void criterion7(Tally& t) {
  double worst = 0;
  int n = 0;
  for (const auto& m : {flat_metric(), round_sphere4(1.0), product_spheres(1.0, 1.0)})
    for (unsigned f = 0; f < 5; ++f) {
      const TwoFormField alpha = trigonometric_two_form(random_trig_two_form(kSeed + 10 + f));
      for (const auto& p : random_points(m, 50, kSeed + 20 + f)) {
        worst = std::max(worst, weitzenboeck_residual(m, alpha, p.chart, p.x).residual);
        ++n;
      }
    }
  t.report(7, worst < 1e-6, "Weitzenboeck formula on 2-forms", fmt("worst %.2e over %d evaluations", worst, n));
}

struct SurfaceCase {
  SurfaceImmersion s;
  MetricField m;
  bool minimal;
};

std::vector<SurfaceCase> surface_cases() {
  return {{product_slice(1), product_spheres(1.0, 1.0), true},
          {equator_s4(), round_sphere4(1.0), true},
          {complex_line(), fubini_study(), true},
          {perturbed_slice(0.2), product_spheres(1.0, 1.0), false}};
}

void criterion8(Tally& t) {
  double energy = 0, averaged = 0;
  for (const auto& c : surface_cases()) {
    const auto nodes = sample_surface(c.s, c.m);
    for (unsigned k = 0; k < 20; ++k) {
      const NormalSection sigma = cli::random_section(c.s, kSeed + 100 + k);
      energy = std::max(energy, variational_identity_31x(nodes, sigma).residual);
      averaged = std::max(averaged, weitzenboeck_variation(nodes, sigma, !c.minimal).residual);
    }
  }
  t.report(8, energy < 1e-5 && averaged < 1e-4, "normal energy and averaged second-variation identities",
           fmt("energy %.2e, averaged %.2e, 20 sections x 4 surfaces", energy, averaged));
}

void criterion9(Tally& t) {
  auto cases = surface_cases();
  cases.push_back({product_slice(2, 0.3, -0.4), product_spheres(1.0, 1.0), true});
  cases.push_back({perturbed_slice(0.35, 0.2, 0.1), twisted_metric(0.5, 0.05), false});
  double worst = 0;
  for (const auto& c : cases)
    for (const auto& p : sample_surface(c.s, c.m))
      worst = std::max(worst, std::abs(p.k_perp_intrinsic - p.k_perp_extrinsic));
  t.report(9, worst < 1e-5, "normal curvature: intrinsic vs extrinsic",
           fmt("worst %.2e over %zu surfaces", worst, cases.size()));
}

void criterion10(Tally& t) {
  const double slice = chern_number(product_slice(1), product_spheres(1.0, 1.0));
  const double eq = chern_number(equator_s4(), round_sphere4(1.0));
  const double line = chern_number(complex_line(), fubini_study());
  const bool pass = std::abs(slice) < 1e-3 && std::abs(eq) < 1e-3 && std::abs(line - 1.0) < 1e-3;
  t.report(10, pass, "Chern numbers 0, 0, 1", fmt("slice %.2e, equator %.2e, line %.8f", slice, eq, line));
}

RefinementResult refined_index(const SurfaceImmersion& s, const MetricField& m) {
  const auto nodes = sample_surface(s, m);
  return refine_until_stable([&](int l) { return assemble_index_form(nodes, SectionBasis(s, l)); }, 2, 10);
}

void criterion11(Tally& t) {
  const MetricField round = round_sphere4(1.0);
  const double d2 = second_variation(equator_s4(), round, generator_section(equator_s4(), round, 0, true));
  const RefinementResult eq = refined_index(equator_s4(), round);
  const RefinementResult line = refined_index(complex_line(), fubini_study());
  const RefinementResult s1 = refined_index(product_slice(1), product_spheres(1.0, 1.0));
  const RefinementResult s2 = refined_index(product_slice(2), product_spheres(1.0, 1.0));
  const SyntheticFixtureReport fx = synthetic_theorem_c_fixture(1.0, 4);
  const bool pass = std::abs(d2 + 8 * kPi) < 1e-3 && eq.morse_index == 2 && line.morse_index == 0 &&
                    s1.morse_index == 0 && s2.morse_index == 0 && fx.pair_index >= 2 && fx.morse_index >= 2 &&
                    fx.delta2_plus < 0 && fx.delta2_minus < 0;
  t.report(11, pass, "stability: equator index 2, line and slices index 0, fixture index >= 2",
           fmt("d2 + 8pi = %.2e, equator %d (L=%d), line %d (L=%d), slices %d/%d, fixture pair %d full %d", d2 + 8 * kPi,
               eq.morse_index, eq.degree_used, line.morse_index, line.degree_used, s1.morse_index, s2.morse_index,
               fx.pair_index, fx.morse_index));
}

std::string capture(const std::string& cmd, int& status) {
  std::string out;
  FILE* f = ::popen(cmd.c_str(), "r");
  if (!f) {
    status = -1;
    return out;
  }
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), f)) > 0) out.append(buf.data(), n);
  status = ::pclose(f);
  return out;
}

void criterion12(Tally& t, const std::string& cli) {
  if (cli.empty()) {
    t.report(12, false, "deterministic verify-identities", "no --cli path given");
    return;
  }
  const std::string cmd = cli + " verify-identities --seed 42 2>/dev/null";
  int s1 = 0, s2 = 0;
  const std::string a = capture(cmd, s1), b = capture(cmd, s2);
  const bool pass = !a.empty() && a == b && s1 == 0 && s2 == 0;
  t.report(12, pass, "deterministic verify-identities",
           fmt("%zu bytes, identical %s, exit %d/%d", a.size(), a == b ? "yes" : "no", s1, s2));
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  for (int k = 1; k < argc; ++k)
    if (!std::strcmp(argv[k], "--cli") && k + 1 < argc) cli = argv[++k];
  Tally t;
  criterion1(t);
  criterion2(t);
  criterion3(t);
  criterion4(t);
  criterion5(t);
  criterion6(t);
  criterion7(t);
  criterion8(t);
  criterion9(t);
  criterion10(t);
  criterion11(t);
  criterion12(t, cli);
  std::printf("%d of 12 criteria failed\n", t.failed);
  return t.failed ? 1 : 0;
}
