#include "curv4/stability_solver.hpp"

#include "curv4/errors.hpp"
#include "curv4/quadrature.hpp"
#include "curv4/spherical_harmonics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

namespace curv4 {

namespace {

constexpr double kTolMinimal = 1e-8;
constexpr std::size_t kChunk = 128;

using Features = Eigen::Matrix<double, 6, Eigen::Dynamic>;
using Feature = Eigen::Matrix<double, 6, 1>;

Feature feature_of(const SectionJet& j) {
  Feature f;
  f << j.a[0], j.a[1], j.nabla(0, 0), j.nabla(1, 0), j.nabla(0, 1), j.nabla(1, 1);
  return f;
}

// Σ_k R(e_k, e_α, e_k, e_β) + ⟨A_α, A_β⟩: the zeroth-order part of the form.
Matrix2 potential(const SurfacePointData& p, const VariationOptions& opt) {
  Matrix2 c;
  for (int al = 0; al < 2; ++al)
    for (int be = 0; be < 2; ++be) {
      double curv = 0.0;
      if (opt.curvature_override) {
        curv = al == be ? 2.0 * *opt.curvature_override : 0.0;
      } else {
        for (int k = 0; k < 2; ++k) curv += component(p.curvature.riemann, k, 2 + al, k, 2 + be);
      }
      c(al, be) = curv + p.sff.a[al].cwiseProduct(p.sff.a[be]).sum();
    }
  return c;
}

double density_bilinear(const SurfacePointData& p, const Feature& x, const Feature& y, const VariationOptions& opt) {
  const Matrix2 c = potential(p, opt);
  return x.tail<4>().dot(y.tail<4>()) - x.head<2>().dot(c * y.head<2>());
}

void require_minimal(const std::vector<SurfacePointData>& nodes) {
  const double r = max_minimality_residual(nodes);
  if (r >= kTolMinimal) throw GeometryError("surface is not minimal (max |H| = " + std::to_string(r) + ")");
}

template <typename F>
void parallel_for(std::size_t n, int threads, F&& f) {
  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t k = 0; k < n; ++k) f(k);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t k = n * w / workers; k < n * (w + 1) / workers; ++k) f(k);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct Matrices {
  Eigen::MatrixXd q, g, e;
};

Matrices assemble(const std::vector<SurfacePointData>& nodes, const SectionBasis& basis,
                  const VariationOptions& opt, int threads) {
  const int n = basis.size();
  Matrices out;
  out.q = Eigen::MatrixXd::Zero(n, n);
  out.g = Eigen::MatrixXd::Zero(n, n);
  out.e = Eigen::MatrixXd::Zero(n, n);
  std::vector<Features> feats(kChunk);
  for (std::size_t begin = 0; begin < nodes.size(); begin += kChunk) {
    const std::size_t count = std::min(kChunk, nodes.size() - begin);
    parallel_for(count, threads, [&](std::size_t i) { feats[i] = basis.features(nodes[begin + i]); });
    Eigen::MatrixXd f(6 * count, n), wq(6 * count, n), fa(2 * count, n), wa(2 * count, n), fd(2 * count, n),
        wd(2 * count, n);
    for (std::size_t i = 0; i < count; ++i) {
      const auto& p = nodes[begin + i];
      const double w = p.weight;
      const Features& x = feats[i];
      f.middleRows(6 * i, 6) = x;
      wq.middleRows(6 * i, 2) = -w * potential(p, opt) * x.topRows<2>();
      wq.middleRows(6 * i + 2, 4) = w * x.bottomRows<4>();
      fa.middleRows(2 * i, 2) = x.topRows<2>();
      wa.middleRows(2 * i, 2) = w * x.topRows<2>();
      // ∇_{e₁}σ + J∇_{e₂}σ
      fd.row(2 * i) = x.row(2) - x.row(5);
      fd.row(2 * i + 1) = x.row(3) + x.row(4);
      wd.middleRows(2 * i, 2) = w * fd.middleRows(2 * i, 2);
    }
    out.q.noalias() += f.transpose() * wq;
    out.g.noalias() += fa.transpose() * wa;
    out.e.noalias() += fd.transpose() * wd;
  }
  return out;
}

struct Range {
  Eigen::MatrixXd t;  // G-orthonormalizing map on the retained range
  int rank = 0;
  double condition = 0.0;
};

Range reduce(const Eigen::MatrixXd& g, double tolerance, bool complete_basis) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  if (es.info() != Eigen::Success) throw GeometryError("mass matrix eigen-solve failed");
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double top = lam.maxCoeff();
  if (!(top > 0.0)) throw GeometryError("mass matrix is not positive");
  std::vector<int> keep;
  for (int k = 0; k < lam.size(); ++k)
    if (lam[k] > tolerance * top) keep.push_back(k);
  if (complete_basis && static_cast<int>(keep.size()) < lam.size())
    throw GeometryError("ill-conditioned mass matrix (condition " + std::to_string(top / lam.minCoeff()) + ")");
  Range r;
  r.rank = static_cast<int>(keep.size());
  r.t.resize(g.rows(), r.rank);
  double low = top;
  for (int c = 0; c < r.rank; ++c) {
    r.t.col(c) = es.eigenvectors().col(keep[c]) / std::sqrt(lam[keep[c]]);
    low = std::min(low, lam[keep[c]]);
  }
  r.condition = top / low;
  return r;
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

double fourth_moment(const std::vector<SurfacePointData>& nodes, const NormalSection& sigma) {
  std::vector<double> terms(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const double a2 = section_jet(nodes[k], sigma).a.squaredNorm();
    terms[k] = nodes[k].weight * a2 * a2;
  }
  return pairwise_sum(terms);
}

}  // namespace

SectionBasis::SectionBasis(const SurfaceImmersion& s, int max_degree)
    : surface_(s), max_degree_(max_degree), size_(harmonic_section_size(s, max_degree)) {
  if (max_degree < 0) throw SpecError("basis degree must be non-negative");
}

Features SectionBasis::features(const SurfacePointData& p) const {
  const auto uv = coordinate_jets(p);
  const int chart = p.geom.chart;
  const auto x = sphere_point(chart, uv[0], uv[1]);
  const SphericalHarmonics harm(max_degree_);
  const std::vector<S2> y = harm.evaluate(x[0], x[1], x[2]);
  const auto gens = surface_.generators<S2>(chart, uv[0], uv[1]);
  const int ng = static_cast<int>(gens.size());
  std::vector<std::array<S2, 2>> comp(ng);
  for (int j = 0; j < ng; ++j) comp[j] = normal_components(p, gens[j]);
  Features out(6, size_);
  for (std::size_t h = 0; h < y.size(); ++h)
    for (int j = 0; j < ng; ++j)
      out.col(static_cast<int>(h) * ng + j) =
          feature_of(section_jet_from_coefficients(p, y[h] * comp[j][0], y[h] * comp[j][1]));
  return out;
}

NormalSection SectionBasis::section(const Eigen::VectorXd& coeffs) const {
  if (coeffs.size() != size_) throw SpecError("section: coefficient count mismatch");
  return harmonic_section(surface_, max_degree_, std::vector<double>(coeffs.data(), coeffs.data() + coeffs.size()));
}

IndexForm assemble_index_form(const std::vector<SurfacePointData>& nodes, const SectionBasis& basis,
                              const IndexOptions& opt) {
  if (nodes.empty()) throw SpecError("assemble_index_form: no quadrature nodes");
  if (opt.require_minimal) require_minimal(nodes);
  Matrices mats = assemble(nodes, basis, opt.variation, opt.threads);
  IndexForm out;
  out.symmetry_residual = (mats.q - mats.q.transpose()).cwiseAbs().maxCoeff();
  out.q = symmetrized(mats.q);
  out.g = symmetrized(mats.g);
  out.dbar = symmetrized(mats.e);

  const bool complete = basis.surface().generator_count() == 2;
  const Range r = reduce(out.g, opt.range_tolerance, complete);
  out.rank = r.rank;
  out.g_condition = r.condition;
  const Eigen::MatrixXd qr = symmetrized(r.t.transpose() * out.q * r.t);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(qr);
  if (es.info() != Eigen::Success) throw GeometryError("index form eigen-solve failed");
  out.spectrum = es.eigenvalues();
  out.eigenvectors = r.t * es.eigenvectors();
  out.q_norm = out.spectrum.cwiseAbs().maxCoeff();
  out.tol_idx = 1e-6 * out.q_norm;
  for (int k = 0; k < out.spectrum.size(); ++k) {
    if (out.spectrum[k] < -out.tol_idx)
      ++out.morse_index;
    else if (out.spectrum[k] <= out.tol_idx)
      ++out.nullity;
  }
  return out;
}

double second_variation_bilinear(const std::vector<SurfacePointData>& nodes, const NormalSection& a,
                                 const NormalSection& b, const VariationOptions& opt) {
  require_minimal(nodes);
  std::vector<double> terms(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto& p = nodes[k];
    terms[k] = p.weight * density_bilinear(p, feature_of(section_jet(p, a)), feature_of(section_jet(p, b)), opt);
  }
  return pairwise_sum(terms);
}

NearHolomorphic near_holomorphic_section(const IndexForm& form, const std::vector<SurfacePointData>& nodes,
                                         const SectionBasis& basis) {
  const bool complete = basis.surface().generator_count() == 2;
  const Range r = reduce(form.g, IndexOptions{}.range_tolerance, complete);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(r.t.transpose() * form.dbar * r.t));
  if (es.info() != Eigen::Success) throw GeometryError("near-holomorphic eigen-solve failed");
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double tie = 1e-8 * (1.0 + std::abs(lam[0]));

  NearHolomorphic out;
  out.chern_number = chern_number(nodes);
  out.negative_chern = out.chern_number < -0.5;
  double best_moment = -1.0;
  for (int k = 0; k < lam.size() && lam[k] <= lam[0] + tie; ++k) {
    Eigen::VectorXd c = r.t * es.eigenvectors().col(k);
    Eigen::Index big = 0;
    c.cwiseAbs().maxCoeff(&big);
    if (c[big] < 0.0) c = -c;
    const NormalSection sigma = basis.section(c);
    const double moment = fourth_moment(nodes, sigma);
    if (moment > best_moment) {
      best_moment = moment;
      out.coeffs = c;
      out.energy = std::max(lam[k], 0.0);
      out.sigma = sigma;
    }
  }
  return out;
}

NearHolomorphic near_holomorphic_section(const std::vector<SurfacePointData>& nodes, const SectionBasis& basis,
                                         int threads) {
  IndexOptions opt;
  opt.require_minimal = false;
  opt.threads = threads;
  return near_holomorphic_section(assemble_index_form(nodes, basis, opt), nodes, basis);
}

RefinementResult refine_until_stable(const std::function<IndexForm(int)>& index_at, int l0, int l_max) {
  if (l0 < 0 || l0 >= l_max) throw SpecError("refine_until_stable: need 0 <= L0 < L_max");
  RefinementResult out;
  for (int l = l0; l <= l_max; l += 2) {
    const IndexForm f = index_at(l);
    out.history.push_back({l, f.morse_index, f.nullity});
    const std::size_t n = out.history.size();
    if (n >= 2 && out.history[n - 1].morse_index == out.history[n - 2].morse_index &&
        out.history[n - 1].nullity == out.history[n - 2].nullity) {
      out.morse_index = f.morse_index;
      out.nullity = f.nullity;
      out.degree_used = l;
      return out;
    }
  }
  throw GeometryError("Morse index did not stabilize by L = " + std::to_string(l_max));
}

TheoremCReport theorem_c_harness(const MetricField& m, const SurfaceImmersion& slice, int max_degree,
                                 const SurfaceQuadrature& quad, int threads) {
  if (slice.kind() != SurfaceKind::Slice && slice.kind() != SurfaceKind::PerturbedSlice)
    throw SpecError("theorem_c_harness expects a slice of S2 x S2");
  if (!slice.compatible_with(m)) throw SpecError("theorem_c_harness: metric is not on S2 x S2");

  const auto nodes = sample_surface(slice, m, quad, threads);
  TheoremCReport rep;
  rep.minimality_residual = max_minimality_residual(nodes);
  rep.chern_number = chern_number(nodes);
  rep.area = area(nodes);
  if (rep.minimality_residual >= kTolMinimal) {
    rep.refused = true;
    rep.verdict = "refused: slice is not minimal";
    return rep;
  }

  const SectionBasis basis(slice, max_degree);
  IndexOptions iopt;
  iopt.threads = threads;
  const IndexForm form = assemble_index_form(nodes, basis, iopt);
  const NearHolomorphic nh = near_holomorphic_section(form, nodes, basis);
  rep.energy = nh.energy;

  const std::size_t n = nodes.size();
  std::vector<double> d_sigma(n), d_j(n), dbar(n), pair(n), aa(n);
  rep.min_pairing = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    const auto& p = nodes[k];
    const SectionJet j = section_jet(p, nh.sigma);
    const double w = p.weight;
    const double norm2 = j.a.squaredNorm();
    const double pairing = self_dual_pairing(p.curvature);
    const double wedge = a_wedge_a_sq(p.sff);
    d_sigma[k] = w * second_variation_density(p, j);
    d_j[k] = w * second_variation_density(p, rotate(j));
    dbar[k] = w * 4.0 * dbar_perp_sq(j);
    pair[k] = w * pairing * norm2;
    aa[k] = w * wedge * norm2;
    rep.min_pairing = std::min(rep.min_pairing, pairing);
    rep.max_a_wedge_a = std::max(rep.max_a_wedge_a, wedge);
  }
  rep.delta2_sigma = pairwise_sum(d_sigma);
  rep.delta2_j_sigma = pairwise_sum(d_j);
  rep.sum = rep.delta2_sigma + rep.delta2_j_sigma;
  rep.dbar_term = pairwise_sum(dbar);
  rep.pairing_term = pairwise_sum(pair);
  rep.a_wedge_a_term = pairwise_sum(aa);
  rep.identity_residual = std::abs(rep.sum - (rep.dbar_term - rep.pairing_term - rep.a_wedge_a_term));

  const std::size_t stride = std::max<std::size_t>(1, n / 256);
  std::vector<std::size_t> picks;
  for (std::size_t k = 0; k < n; k += stride) picks.push_back(k);
  std::vector<double> ks(picks.size());
  SectionalOptions sopt;
  sopt.starts = 16;
  parallel_for(picks.size(), threads, [&](std::size_t i) {
    ks[i] = min_sectional_curvature(nodes[picks[i]].curvature, sopt).value;
  });
  rep.min_sectional = *std::min_element(ks.begin(), ks.end());

  const double scale = 1.0 + std::abs(nodes.front().curvature.s) / 12.0;
  rep.hypothesis_pairing = rep.min_pairing >= -1e-9 * scale;
  rep.hypothesis_geodesic = rep.max_a_wedge_a < 1e-10;
  rep.hypothesis_positive_k = rep.min_sectional > 1e-9 * scale;

  if (rep.sum < -1e-8) {
    rep.verdict = "unstable: delta2(sigma) + delta2(J sigma) < 0";
  } else if (rep.hypothesis_pairing && rep.hypothesis_geodesic && rep.hypothesis_positive_k) {
    rep.verdict = "contradiction: stability forces K_perp = K(e1,e3) + K(e1,e4) > 0, so c1 > 0, but c1 = 0";
  } else {
    std::string failed;
    auto add = [&](bool ok, const char* what) {
      if (ok) return;
      if (!failed.empty()) failed += ", ";
      failed += what;
    };
    add(rep.hypothesis_pairing, "s/6 - W+ >= 0");
    add(rep.hypothesis_geodesic, "A^A = 0");
    add(rep.hypothesis_positive_k, "K > 0");
    rep.verdict = "no contradiction: fails " + failed;
  }
  return rep;
}

SyntheticFixtureReport synthetic_theorem_c_fixture(double kappa, int max_degree, const SurfaceQuadrature& quad,
                                                   int threads) {
  if (!(kappa > 0.0)) throw SpecError("fixture curvature must be positive");
  const SurfaceImmersion s = product_slice(1);
  const MetricField m = product_spheres(1.0, 1.0);
  const auto nodes = sample_surface(s, m, quad, threads);
  VariationOptions vopt;
  vopt.curvature_override = kappa;

  SyntheticFixtureReport rep;
  rep.kappa = kappa;
  rep.area = area(nodes);
  const NormalSection sigma = generator_section(s, m, 0, true);
  const std::size_t n = nodes.size();
  std::vector<double> ss(n), jj(n), sj(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& p = nodes[k];
    const SectionJet j = section_jet(p, sigma);
    const Feature a = feature_of(j);
    const Feature b = feature_of(rotate(j));
    ss[k] = p.weight * density_bilinear(p, a, a, vopt);
    jj[k] = p.weight * density_bilinear(p, b, b, vopt);
    sj[k] = p.weight * density_bilinear(p, a, b, vopt);
  }
  require_minimal(nodes);
  rep.delta2_parallel = pairwise_sum(ss);
  const double dj = pairwise_sum(jj);
  const double cross = pairwise_sum(sj);
  rep.pair_sum = rep.delta2_parallel + dj;
  rep.delta2_plus = rep.pair_sum + 2.0 * cross;
  rep.delta2_minus = rep.pair_sum - 2.0 * cross;

  Matrix2 pair_form;
  pair_form << rep.delta2_parallel, cross, cross, dj;
  const Vector2 ev = Eigen::SelfAdjointEigenSolver<Matrix2>(pair_form).eigenvalues();
  rep.pair_index = (ev[0] < 0.0 ? 1 : 0) + (ev[1] < 0.0 ? 1 : 0);

  IndexOptions iopt;
  iopt.variation = vopt;
  iopt.threads = threads;
  rep.morse_index = assemble_index_form(nodes, SectionBasis(s, max_degree), iopt).morse_index;
  return rep;
}

}  // namespace curv4
