#include "identities.hpp"

#include "parallel.hpp"

#include "curv4/curvature_engine.hpp"
#include "curv4/stability_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace curv4::cli {

using json = nlohmann::ordered_json;

namespace {

class Table {
 public:
  explicit Table(const RunConfig& cfg) : cfg_(cfg) {}

  void add(const std::string& identity, const std::string& subject, double residual, double tolerance,
           int samples) {
    IdentityRow r;
    r.identity = identity;
    r.subject = subject;
    r.residual = residual;
    r.tolerance = cfg_.tol.value_or(tolerance);
    r.samples = samples;
    r.pass = std::isfinite(residual) && residual <= r.tolerance;
    rows_.push_back(r);
  }

  std::vector<IdentityRow> take() { return std::move(rows_); }

 private:
  const RunConfig& cfg_;
  std::vector<IdentityRow> rows_;
};

unsigned mix(unsigned seed, unsigned salt) { return seed * 2654435761u + salt * 40503u + 17u; }

void metric_suite(Table& t, const RunConfig& cfg, const MetricField& m, unsigned salt) {
  const auto pts = random_points(m, cfg.identity_points, mix(cfg.seed, salt));
  const int n = static_cast<int>(pts.size());
  std::vector<CurvatureFrameData> curv(pts.size());
  std::vector<PointMargins> margins(pts.size());
  SectionalOptions no_sectional;
  no_sectional.enabled = false;
  parallel_chunks(pts.size(), cfg.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      curv[k] = riemann_at(m, pts[k].chart, pts[k].x);
      margins[k] = point_margins(m, pts[k].chart, pts[k].x, no_sectional);
    }
  });
  double bianchi = 0.0, block = 0.0, trace = 0.0, implication = 0.0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    bianchi = std::max(bianchi, margins[k].bianchi_residual);
    block = std::max(block, margins[k].block_residual);
    trace = std::max(trace, margins[k].trace_residual);
    const Lemma21Pair lp = lemma21_check(curv[k]);
    for (const auto& rec : {lp.plus, lp.minus})
      if (rec.antecedent) implication = std::max(implication, -rec.consequent_margin);
  }
  t.add("bianchi", m.name(), bianchi, 1e-8, n);
  t.add("curvature-operator-blocks", m.name(), block, 1e-6, n);
  t.add("weyl-traceless", m.name(), trace, 1e-6, n);
  t.add("self-dual-implication", m.name(), std::max(implication, 0.0), 1e-9, n);

  if (m.is_kaehler()) {
    double spectrum = 0.0, margin = 0.0;
    for (const auto& c : curv) {
      const Vector3 w = sorted_eigenvalues(c.w_plus);
      const Vector3 expect_w{-c.s / 12.0, -c.s / 12.0, c.s / 6.0};
      spectrum = std::max(spectrum, (w - expect_w).cwiseAbs().maxCoeff());
      const Vector3 g = sorted_eigenvalues(c.s / 6.0 * Matrix3::Identity() - c.w_plus);
      const Vector3 expect_g{0.0, c.s / 4.0, c.s / 4.0};
      margin = std::max(margin, (g - expect_g).cwiseAbs().maxCoeff());
    }
    t.add("kaehler-self-dual-spectrum", m.name(), spectrum, 1e-6, n);
    t.add("kaehler-positivity-spectrum", m.name(), margin, 1e-6, n);
  }
}

void weitzenboeck_suite(Table& t, const RunConfig& cfg, const MetricField& m, unsigned salt) {
  const int count = std::min(cfg.identity_points, 10);
  const auto pts = random_points(m, count, mix(cfg.seed, salt));
  std::vector<TwoFormField> forms;
  for (unsigned f = 0; f < 5; ++f) forms.push_back(trigonometric_two_form(random_trig_two_form(mix(cfg.seed, salt + 100 + f))));
  if (m.is_kaehler()) forms.push_back(kaehler_form_field(m));
  std::vector<double> res(pts.size() * forms.size());
  parallel_chunks(res.size(), cfg.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      const auto& p = pts[k % pts.size()];
      res[k] = weitzenboeck_residual(m, forms[k / pts.size()], p.chart, p.x).residual;
    }
  });
  t.add("weitzenboeck-two-forms", m.name(), *std::max_element(res.begin(), res.end()), 1e-6,
        static_cast<int>(res.size()));
}

struct SectionChecks {
  double energy = 0.0;
  double averaged = 0.0;
  double j_linear = 0.0;
  double dbar_frame = 0.0;
  double rotation_sum = 0.0;
};

SectionChecks check_section(const std::vector<SurfacePointData>& nodes, const NormalSection& sigma, bool minimal,
                            unsigned seed) {
  SectionChecks out;
  out.energy = variational_identity_31x(nodes, sigma).residual;
  out.averaged = weitzenboeck_variation(nodes, sigma, !minimal).residual;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (const auto& p : nodes) {
    const auto uv = coordinate_jets(p);
    const Vec4<S2> field = sigma.field(p.geom.chart, uv[0], uv[1]);
    const auto a = normal_components(p, field);
    Vec4<S2> jfield;
    for (int i = 0; i < 4; ++i) jfield[i] = a[0] * p.normal_jets[1][i] - a[1] * p.normal_jets[0][i];
    const SectionJet j = section_jet_from_coefficients(p, a[0], a[1]);
    const SectionJet jj = section_jet_from_field(p, jfield);
    out.j_linear = std::max(out.j_linear, (jj.nabla - rotate(j).nabla).cwiseAbs().maxCoeff());

    const double d0 = dbar_perp_sq(j, 0.0);
    const double scale = 1.0 + j.nabla.squaredNorm();
    for (double th : {0.25 * std::numbers::pi, angle(rng)})
      out.dbar_frame = std::max(out.dbar_frame, std::abs(dbar_perp_sq(j, th) - d0) / scale);

    const Matrix2 as = j.a[0] * p.sff.a[0] + j.a[1] * p.sff.a[1];
    const SectionJet r = rotate(j);
    const Matrix2 ajs = r.a[0] * p.sff.a[0] + r.a[1] * p.sff.a[1];
    const double lhs = as.squaredNorm() + ajs.squaredNorm();
    const double rhs = (p.sff.shape_norm3 + p.sff.shape_norm4) * j.a.squaredNorm();
    out.rotation_sum = std::max(out.rotation_sum, std::abs(lhs - rhs) / (1.0 + rhs));
  }
  return out;
}

void surface_suite(Table& t, const RunConfig& cfg, const SurfaceImmersion& s, const MetricField& m, unsigned salt) {
  SurfaceQuadrature quad;
  if (cfg.quad) quad = {(*cfg.quad)[0], (*cfg.quad)[1]};
  const auto nodes = sample_surface(s, m, quad, cfg.threads);
  const int n = static_cast<int>(nodes.size());
  const bool minimal = max_minimality_residual(nodes) < 1e-8;
  const std::string subject = s.name() + " in " + m.name();

  double cross = 0.0, pairing = 0.0, expansion = 0.0;
  for (const auto& p : nodes) {
    cross = std::max(cross, std::abs(p.k_perp_intrinsic - p.k_perp_extrinsic));
    pairing = std::max(pairing, std::abs(self_dual_pairing(p.curvature) - self_dual_pairing_normal(p.curvature)));
    expansion = std::max(expansion, std::abs(a_wedge_a_sq(p.sff) - a_wedge_a_sq_expanded(p.sff)));
  }
  t.add("normal-curvature-cross-path", subject, cross, 1e-5, n);
  t.add("normal-curvature-pairing", subject, pairing, 1e-5, n);
  t.add("a-wedge-a-expansion", subject, expansion, 1e-10, n);
  const double c1 = chern_number(nodes);
  t.add("chern-integrality", subject, std::abs(c1 - std::round(c1)), 1e-3, 1);

  const int count = cfg.identity_sections;
  std::vector<SectionChecks> checks(static_cast<std::size_t>(count));
  parallel_chunks(checks.size(), cfg.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      const unsigned sd = mix(cfg.seed, salt * 1000u + static_cast<unsigned>(k));
      checks[k] = check_section(nodes, random_section(s, sd), minimal, sd + 1u);
    }
  });
  SectionChecks worst;
  for (const auto& c : checks) {
    worst.energy = std::max(worst.energy, c.energy);
    worst.averaged = std::max(worst.averaged, c.averaged);
    worst.j_linear = std::max(worst.j_linear, c.j_linear);
    worst.dbar_frame = std::max(worst.dbar_frame, c.dbar_frame);
    worst.rotation_sum = std::max(worst.rotation_sum, c.rotation_sum);
  }
  t.add("normal-energy-identity", subject, worst.energy, 1e-5, count);
  t.add("averaged-second-variation", subject, worst.averaged, 1e-4, count);
  t.add("normal-connection-j-linear", subject, worst.j_linear, 1e-8, count);
  t.add("dbar-frame-independence", subject, worst.dbar_frame, 1e-8, count);
  t.add("shape-operator-rotation-sum", subject, worst.rotation_sum, 1e-10, count);

  if (s.kind() == SurfaceKind::Slice) {
    const auto lc = log_norm_check(nodes, generator_section(s, m, 0, true));
    t.add("log-norm-curvature", subject, lc.residual, 1e-6, n);
  } else if (s.kind() == SurfaceKind::PerturbedSlice) {
    const NearHolomorphic nh = near_holomorphic_section(nodes, SectionBasis(s, 8), cfg.threads);
    const auto lc = log_norm_check(nodes, nh.sigma, false);
    t.add("log-norm-curvature", subject, lc.residual, 1e-3, n);
  }
}

}  // namespace

NormalSection random_section(const SurfaceImmersion& s, unsigned seed) {
  constexpr int kDegree = 3;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> c(static_cast<std::size_t>(harmonic_section_size(s, kDegree)));
  for (double& x : c) x = gauss(rng) / std::sqrt(static_cast<double>(c.size()));
  return harmonic_section(s, kDegree, c);
}

ImplicationSweep self_dual_implication_sweep(int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ImplicationSweep out;
  out.worst_margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < count; ++k) {
    const double s = -6.0 + 36.0 * unit(rng);
    const double span = std::max(std::abs(s), 1.0) * 0.3;
    // Eigenvalues near the antecedent boundary, then a random rotation.
    const double w1 = -s / 12.0 + span * (unit(rng) - 0.3);
    const double w2 = w1 + span * unit(rng);
    const Vector3 ev{w1, w2, -w1 - w2};
    Eigen::Matrix3d q = Eigen::Matrix3d::NullaryExpr([&](Eigen::Index, Eigen::Index) { return unit(rng) - 0.5; });
    q = Eigen::HouseholderQR<Eigen::Matrix3d>(q).householderQ();
    const Matrix3 w = q * ev.asDiagonal() * q.transpose();
    const Lemma21Record r = lemma21_check(s, w, tol_psd(s));
    ++out.samples;
    if (r.antecedent) {
      ++out.antecedent_holds;
      out.worst_margin = std::min(out.worst_margin, r.consequent_margin);
      if (r.consequent_margin < -1e-9) ++out.counterexamples;
    }
  }
  return out;
}

std::vector<IdentityRow> run_identity_suite(const RunConfig& cfg) {
  Table t(cfg);
  const std::vector<MetricField> metrics = {flat_metric(),    round_sphere4(1.0), product_spheres(1.0, 1.0),
                                            ht_metric(0.5),   twisted_metric(0.5, 0.05), fubini_study()};
  unsigned salt = 1;
  for (const auto& m : metrics) metric_suite(t, cfg, m, salt++);

  const ImplicationSweep sw = self_dual_implication_sweep(cfg.identity_spectra, mix(cfg.seed, 77));
  t.add("self-dual-implication", "synthetic-spectra", std::max(0.0, -sw.worst_margin), 1e-9, sw.samples);

  for (const auto& m : {flat_metric(), round_sphere4(1.0), product_spheres(1.0, 1.0), fubini_study()})
    weitzenboeck_suite(t, cfg, m, salt++);

  const MetricField product = product_spheres(1.0, 1.0);
  const MetricField sphere = round_sphere4(1.0);
  const MetricField fs = fubini_study();
  surface_suite(t, cfg, product_slice(1), product, salt++);
  surface_suite(t, cfg, equator_s4(), sphere, salt++);
  surface_suite(t, cfg, complex_line(), fs, salt++);
  surface_suite(t, cfg, perturbed_slice(0.2), product, salt++);
  return t.take();
}

CommandResult cmd_verify_identities(const RunConfig& cfg) {
  return guarded("verify-identities", cfg, [&] {
    if (cfg.tol && !(*cfg.tol > 0.0)) throw SpecError("tolerance must be positive");
    if (cfg.identity_points < 1 || cfg.identity_sections < 1 || cfg.identity_spectra < 1)
      throw SpecError("identity sample counts must be positive");
    const std::vector<IdentityRow> rows = run_identity_suite(cfg);
    CommandResult res;
    json& r = res.report;
    r = report_header("verify-identities", cfg);
    json table = json::array();
    json violations = json::array();
    for (const auto& row : rows) {
      table.push_back({{"identity", row.identity},
                       {"subject", row.subject},
                       {"residual", row.residual},
                       {"tolerance", row.tolerance},
                       {"margin", row.tolerance - row.residual},
                       {"samples", row.samples},
                       {"pass", row.pass}});
      if (!row.pass) violations.push_back(row.identity + " [" + row.subject + "]");
    }
    r["identities"] = table;
    r["violations"] = violations;
    r["summary"] = {{"checked", rows.size()}, {"failed", violations.size()}};
    res.exit_code = violations.empty() ? kOk : kViolation;
    return res;
  });
}

}  // namespace curv4::cli
