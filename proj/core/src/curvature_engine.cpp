#include "curv4/curvature_engine.hpp"

#include "curv4/small_matrix.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

namespace curv4 {

Matrix4 Christoffel::of_direction(int k) const {
  Matrix4 m;
  for (int i = 0; i < 4; ++i)
    for (int l = 0; l < 4; ++l) m(i, l) = upper[i](k, l);
  return m;
}

Vector4 Christoffel::contract(const Vector4& x, const Vector4& y) const {
  Vector4 r;
  for (int k = 0; k < 4; ++k) r[k] = x.dot(upper[k] * y);
  return r;
}

namespace {

// Γ_lij = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
double gamma_lower(const std::array<Matrix4, 4>& dg, int l, int i, int j) {
  return 0.5 * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
}

}  // namespace

Christoffel christoffel_from_jets(const MetricJets& j) {
  const Matrix4 ginv = j.g.inverse();
  Christoffel c;
  for (int k = 0; k < 4; ++k) {
    c.upper[k].setZero();
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int l = 0; l < 4; ++l) c.upper[k](a, b) += ginv(k, l) * gamma_lower(j.dg, l, a, b);
  }
  return c;
}

Christoffel christoffel(const MetricField& m, int chart, const Point4& p) {
  return christoffel_from_jets(m.jets(chart, p));
}

CurvatureLike coordinate_riemann(const MetricJets& j) {
  const Matrix4 ginv = j.g.inverse();
  const Christoffel c = christoffel_from_jets(j);

  // ∂_m Γ^k_ab = ∂_m g^{kl} Γ_lab + g^{kl} ∂_m Γ_lab, ∂_m g⁻¹ = −g⁻¹ ∂_m g g⁻¹
  std::array<std::array<Matrix4, 4>, 4> dgamma;  // dgamma[m][k](a,b)
  for (int m = 0; m < 4; ++m) {
    const Matrix4 dginv = -ginv * j.dg[m] * ginv;
    std::array<Matrix4, 4> ddg_m;
    for (int k = 0; k < 4; ++k) ddg_m[k] = j.ddg[m][k];
    for (int k = 0; k < 4; ++k) {
      dgamma[m][k].setZero();
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          for (int l = 0; l < 4; ++l)
            dgamma[m][k](a, b) +=
                dginv(k, l) * gamma_lower(j.dg, l, a, b) + ginv(k, l) * gamma_lower(ddg_m, l, a, b);
    }
  }

  CurvatureLike r;
  for (int p = 0; p < 6; ++p) {
    const auto [a, b] = kBivectorPairs[p];
    for (int q = 0; q < 6; ++q) {
      const auto [cc, d] = kBivectorPairs[q];
      double sum = 0.0;
      for (int e = 0; e < 4; ++e) {
        double qe = dgamma[a][e](b, d) - dgamma[b][e](a, d);
        for (int f = 0; f < 4; ++f)
          qe += c.upper[f](b, d) * c.upper[e](a, f) - c.upper[f](a, d) * c.upper[e](b, f);
        sum += j.g(cc, e) * qe;
      }
      r(p, q) = sum;
    }
  }
  return 0.5 * (r + r.transpose());
}

Matrix4 cholesky_frame(const Matrix4& g) {
  Eigen::LLT<Matrix4> llt(g);
  if (llt.info() != Eigen::Success) throw GeometryError("metric is not positive definite");
  const Matrix4 l = llt.matrixL();
  // E = L^{-T} satisfies Eᵗ g E = I; its determinant is positive.
  return l.transpose().triangularView<Eigen::Upper>().solve(Matrix4::Identity());
}

namespace {

Matrix6 induced_on_bivectors(const Matrix4& e) {
  Matrix6 lam;
  for (int p = 0; p < 6; ++p) {
    const auto [a, b] = kBivectorPairs[p];
    lam.col(p) = wedge(e.col(a), e.col(b));
  }
  return lam;
}

void fill_blocks(CurvatureFrameData& c) {
  const Matrix6& pm = eta_change_of_basis();
  c.r_op = pm.transpose() * c.riemann * pm;
  c.r_op = 0.5 * (c.r_op + c.r_op.transpose());
  const double s12 = c.s / 12.0;
  c.w_plus = c.r_op.topLeftCorner<3, 3>() - s12 * Matrix3::Identity();
  c.w_minus = c.r_op.bottomRightCorner<3, 3>() - s12 * Matrix3::Identity();
  c.ric_block = c.r_op.topRightCorner<3, 3>();
}

}  // namespace

CurvatureFrameData curvature_from_jets(const MetricJets& j, int chart, const Point4& p,
                                       const std::optional<Matrix4>& frame) {
  CurvatureFrameData c;
  c.chart = chart;
  c.point = p;
  c.metric = j.g;
  c.frame = frame ? *frame : cholesky_frame(j.g);
  const Matrix6 lam = induced_on_bivectors(c.frame);
  c.riemann = lam.transpose() * coordinate_riemann(j) * lam;
  c.riemann = 0.5 * (c.riemann + c.riemann.transpose());
  c.ric = ricci_contraction(c.riemann);
  c.s = c.ric.trace();
  c.ric_traceless = c.ric - 0.25 * c.s * Matrix4::Identity();
  fill_blocks(c);
  return c;
}

CurvatureFrameData riemann_at(const MetricField& m, int chart, const Point4& p,
                              const std::optional<Matrix4>& frame) {
  m.check_chart(chart);
  return curvature_from_jets(m.jets(chart, p), chart, p, frame);
}

const DecompositionCoefficients& decomposition_coefficients() {
  static const DecompositionCoefficients coeffs = [] {
    const Matrix4 id = Matrix4::Identity();
    // s(g⊘g) = 4·Ric(g⊘g)(0,0) for the isotropic probe.
    const double lambda = ricci_contraction(kulkarni_nomizu(id, id))(0, 0);
    Matrix4 b = Matrix4::Zero();
    b(0, 0) = 1.0;
    b(1, 1) = -1.0;
    const double mu = ricci_contraction(kulkarni_nomizu(b, id))(0, 0);
    return DecompositionCoefficients{1.0 / (4.0 * lambda), 1.0 / mu};
  }();
  return coeffs;
}

Decomposition decompose(const CurvatureFrameData& c) {
  const auto& k = decomposition_coefficients();
  const Matrix4 id = Matrix4::Identity();
  Decomposition d;
  d.s = c.s;
  d.ric_traceless = c.ric_traceless;
  const CurvatureLike scalar_part = k.scalar * c.s * kulkarni_nomizu(id, id);
  const CurvatureLike ricci_part = k.ricci * kulkarni_nomizu(c.ric_traceless, id);
  d.weyl = c.riemann - scalar_part - ricci_part;
  d.reconstruction_residual = (c.riemann - (scalar_part + ricci_part + d.weyl)).cwiseAbs().maxCoeff();
  return d;
}

WeylBlocks weyl_blocks(const CurvatureFrameData& c) {
  return WeylBlocks{c.w_plus, c.w_minus, c.ric_block};
}

double block_identity_residual(const CurvatureFrameData& c) {
  const Decomposition d = decompose(c);
  const Matrix6& pm = eta_change_of_basis();
  const Matrix6 w = pm.transpose() * d.weyl * pm;
  const Matrix6 ric =
      pm.transpose() * (decomposition_coefficients().ricci * kulkarni_nomizu(c.ric_traceless, Matrix4::Identity())) *
      pm;
  Matrix6 expected = Matrix6::Zero();
  const double s12 = c.s / 12.0;
  expected.topLeftCorner<3, 3>() = s12 * Matrix3::Identity() + w.topLeftCorner<3, 3>();
  expected.bottomRightCorner<3, 3>() = s12 * Matrix3::Identity() + w.bottomRightCorner<3, 3>();
  expected.topRightCorner<3, 3>() = ric.topRightCorner<3, 3>();
  expected.bottomLeftCorner<3, 3>() = ric.bottomLeftCorner<3, 3>();
  return (c.r_op - expected).cwiseAbs().maxCoeff();
}

Vector3 sorted_eigenvalues(const Matrix3& m) {
  Eigen::SelfAdjointEigenSolver<Matrix3> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

namespace {

Matrix4 antisym_from_bivector(const Bivector6& w) {
  Matrix4 o = Matrix4::Zero();
  for (int p = 0; p < 6; ++p) {
    const auto [i, j] = kBivectorPairs[p];
    o(i, j) = w[p];
    o(j, i) = -w[p];
  }
  return o;
}

using Frame2 = Eigen::Matrix<double, 4, 2>;

Frame2 orthonormalize(Frame2 m) {
  m.col(0).normalize();
  m.col(1) -= m.col(0).dot(m.col(1)) * m.col(0);
  m.col(1).normalize();
  return m;
}

double plane_value(const CurvatureLike& r, const Frame2& m) {
  const Bivector6 xi = wedge(m.col(0), m.col(1));
  return xi.dot(r * xi);
}

Frame2 horizontal_gradient(const CurvatureLike& r, const Frame2& m) {
  const Bivector6 xi = wedge(m.col(0), m.col(1));
  const Matrix4 omega = antisym_from_bivector(r * xi);
  Frame2 g;
  g.col(0) = 2.0 * omega * m.col(1);
  g.col(1) = -2.0 * omega * m.col(0);
  return g - m * (m.transpose() * g);
}

struct LocalResult {
  double value;
  Frame2 m;
};

LocalResult descend(const CurvatureLike& r, Frame2 m, double scale, const SectionalOptions& opt) {
  m = orthonormalize(m);
  double f = plane_value(r, m);
  double t = 0.5 / scale;
  for (int it = 0; it < opt.max_iterations; ++it) {
    const Frame2 g = horizontal_gradient(r, m);
    const double gn2 = g.squaredNorm();
    if (gn2 == 0.0) break;
    bool accepted = false;
    double step = 0.0;
    while (t * std::sqrt(gn2) >= opt.step_tolerance) {
      const Frame2 trial = orthonormalize(m - t * g);
      const double ft = plane_value(r, trial);
      if (ft <= f - 0.3 * t * gn2) {
        step = t * std::sqrt(gn2);
        m = trial;
        f = ft;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted || step < opt.step_tolerance) break;
    t *= 2.0;
  }
  return {f, m};
}

}  // namespace

SectionalMinimum min_sectional_curvature(const CurvatureLike& riemann, const SectionalOptions& opt) {
  const double scale = std::max(riemann.cwiseAbs().maxCoeff(), 1e-300);
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  LocalResult best{std::numeric_limits<double>::infinity(), Frame2::Zero()};
  const int starts = std::max(opt.starts, 1);
  for (int k = 0; k < starts; ++k) {
    Frame2 m;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 2; ++j) m(i, j) = normal(rng);
    const LocalResult res = descend(riemann, m, scale, opt);
    if (res.value < best.value) best = res;
  }
  SectionalMinimum out;
  out.value = best.value;
  out.x = best.m.col(0);
  out.y = best.m.col(1);
  out.plane = wedge(out.x, out.y);
  return out;
}

SectionalMinimum min_sectional_curvature(const CurvatureFrameData& c, const SectionalOptions& opt) {
  return min_sectional_curvature(c.riemann, opt);
}

double max_sectional_curvature(const CurvatureFrameData& c, const SectionalOptions& opt) {
  return -min_sectional_curvature(CurvatureLike(-c.riemann), opt).value;
}

Lemma21Record lemma21_check(double s, const Matrix3& w, double tol) {
  Lemma21Record r;
  r.antecedent_margin = sorted_eigenvalues(s / 12.0 * Matrix3::Identity() + w)[0];
  r.consequent_margin = sorted_eigenvalues(s / 6.0 * Matrix3::Identity() - w)[0];
  r.antecedent = r.antecedent_margin >= -tol;
  r.consequent = r.consequent_margin >= -tol;
  r.violation = r.antecedent && !r.consequent;
  return r;
}

Lemma21Pair lemma21_check(const CurvatureFrameData& c) {
  const double tol = tol_psd(c.s);
  return {lemma21_check(c.s, c.w_plus, tol), lemma21_check(c.s, c.w_minus, tol)};
}

Matrix4 frame_complex_structure(const CurvatureFrameData& c, const Matrix4& j_coord) {
  return c.frame.inverse() * j_coord * c.frame;
}

double curvature4(const CurvatureLike& r, const Vector4& a, const Vector4& b, const Vector4& c,
                  const Vector4& d) {
  return wedge(a, b).dot(r * wedge(c, d));
}

double holomorphic_bisectional(const CurvatureFrameData& c, const Matrix4& j_frame, const Vector4& x,
                               const Vector4& y) {
  return curvature4(c.riemann, x, j_frame * x, y, j_frame * y);
}

PointMargins point_margins(const MetricField& m, int chart, const Point4& p, const SectionalOptions& opt) {
  const CurvatureFrameData c = riemann_at(m, chart, p);
  PointMargins r;
  r.chart = chart;
  r.x = p;
  r.s = c.s;
  r.min_sectional = opt.enabled ? min_sectional_curvature(c, opt).value : std::nan("");
  const Matrix3 id = Matrix3::Identity();
  r.s6_minus_wplus = sorted_eigenvalues(c.s / 6.0 * id - c.w_plus)[0];
  r.s6_minus_wminus = sorted_eigenvalues(c.s / 6.0 * id - c.w_minus)[0];
  r.s12_plus_wplus = sorted_eigenvalues(c.s / 12.0 * id + c.w_plus)[0];
  r.s12_plus_wminus = sorted_eigenvalues(c.s / 12.0 * id + c.w_minus)[0];
  Eigen::SelfAdjointEigenSolver<Matrix6> es(c.r_op, Eigen::EigenvaluesOnly);
  r.r_op = es.eigenvalues()[0];
  r.trace_residual = std::max(std::abs(c.w_plus.trace()), std::abs(c.w_minus.trace()));
  r.block_residual = block_identity_residual(c);
  r.bianchi_residual = first_bianchi_residual(c.riemann);
  return r;
}

namespace {

void absorb(Margin& m, double value, double tol, const PointMargins& p) {
  if (std::isnan(value)) return;
  if (value < -tol) m.holds = false;
  if (value < m.value) {
    m.value = value;
    m.worst = SamplePoint{p.chart, p.x};
  }
}

}  // namespace

ConditionReport aggregate_margins(const std::vector<PointMargins>& records) {
  ConditionReport r;
  for (const auto& p : records) {
    const double tol = tol_psd(p.s);
    absorb(r.min_sectional, p.min_sectional, tol, p);
    absorb(r.s6_minus_wplus, p.s6_minus_wplus, tol, p);
    absorb(r.s6_minus_wminus, p.s6_minus_wminus, tol, p);
    absorb(r.s12_plus_wplus, p.s12_plus_wplus, tol, p);
    absorb(r.s12_plus_wminus, p.s12_plus_wminus, tol, p);
    absorb(r.r_op, p.r_op, tol, p);
    r.min_s = std::min(r.min_s, p.s);
    r.max_s = std::max(r.max_s, p.s);
    r.max_trace_residual = std::max(r.max_trace_residual, p.trace_residual);
    r.max_block_residual = std::max(r.max_block_residual, p.block_residual);
    r.max_bianchi_residual = std::max(r.max_bianchi_residual, p.bianchi_residual);
  }
  r.points = records.size();
  return r;
}

ConditionReport condition_check(const MetricField& m, const std::vector<SamplePoint>& grid, int threads,
                                std::vector<PointMargins>* records, const SectionalOptions& opt) {
  std::vector<PointMargins> out(grid.size());
  const std::size_t n = grid.size();
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n));
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = point_margins(m, grid[i].chart, grid[i].x, opt);
  };
  if (workers == 1) {
    run(0, n);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t b = n * w / workers, e = n * (w + 1) / workers;
      pool.emplace_back([&, w, b, e] {
        try {
          run(b, e);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  ConditionReport r = aggregate_margins(out);
  if (records) *records = std::move(out);
  return r;
}

TwoFormField trigonometric_two_form(const TrigTwoForm& f) {
  return [f](int, const Vec4<D2>& x) {
    std::array<D2, 6> out;
    for (int p = 0; p < 6; ++p) {
      D2 arg(f.phase[p]);
      for (int k = 0; k < 4; ++k) arg += f.wavevector[p][k] * x[k];
      out[p] = f.amplitude[p] * sin(arg);
    }
    return out;
  };
}

TrigTwoForm random_trig_two_form(unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  TrigTwoForm f;
  for (int p = 0; p < 6; ++p) {
    f.amplitude[p] = unit(rng);
    for (int k = 0; k < 4; ++k) f.wavevector[p][k] = 1.5 * unit(rng);
    f.phase[p] = std::numbers::pi * unit(rng);
  }
  return f;
}

TwoFormField kaehler_form_field(const MetricField& m) {
  if (!m.is_kaehler()) throw SpecError("kaehler_form_field: metric " + m.name() + " is not Kähler");
  const MetricField* field = &m;
  return [field](int chart, const Vec4<D2>& x) {
    Point4 p{x[0].v.v, x[1].v.v, x[2].v.v, x[3].v.v};
    const Matrix4 jm = field->kaehler()->complex_structure(chart, p);
    const Mat4<D2> g = field->eval_t<D2>(chart, x);
    std::array<D2, 6> a;
    for (int q = 0; q < 6; ++q) {
      const auto [i, j] = kBivectorPairs[q];
      D2 sum(0.0);
      for (int k = 0; k < 4; ++k) sum += jm(k, i) * g[k][j];
      a[q] = sum;
    }
    return a;
  };
}

namespace {

template <typename T>
Mat4<T> full_two_form(const std::array<T, 6>& a) {
  Mat4<T> m = zero_mat4<T>();
  for (int q = 0; q < 6; ++q) {
    const auto [i, j] = kBivectorPairs[q];
    m[i][j] = a[q];
    m[j][i] = T(0.0) - a[q];
  }
  return m;
}

Bivector6 to_frame(const Matrix4& alpha, const Matrix4& e) {
  const Matrix4 f = e.transpose() * alpha * e;
  Bivector6 out;
  for (int q = 0; q < 6; ++q) {
    const auto [i, j] = kBivectorPairs[q];
    out[q] = f(i, j);
  }
  return out;
}

}  // namespace

WeitzenboeckTerms weitzenboeck_residual(const MetricField& m, const TwoFormField& alpha, int chart,
                                        const Point4& p) {
  m.check_chart(chart);
  const Vec4<D2> x = seed2(p);
  const Mat4<D2> g2 = m.eval_t<D2>(chart, x);
  const Mat4<D2> ginv2 = inverse_spd(g2);
  const D2 sq2 = sqrt(determinant_spd(g2));
  const Mat4<D2> a2 = full_two_form(alpha(chart, x));

  Mat4<D1> g1, ginv1, a1;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      g1[i][j] = g2[i][j].v;
      ginv1[i][j] = ginv2[i][j].v;
      a1[i][j] = a2[i][j].v;
    }
  const D1 sq1 = sq2.v;
  Matrix4 g0, ginv0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      g0(i, j) = g1[i][j].v;
      ginv0(i, j) = ginv1[i][j].v;
    }

  // δdα: (dα)_ijk, raised with g⁻¹, then (δβ)^{jk} = −(1/√g) ∂_i(√g β^{ijk}).
  using T3 = std::array<std::array<std::array<D1, 4>, 4>, 4>;
  T3 da, up;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) da[i][j][k] = a2[j][k].d[i] + a2[k][i].d[j] + a2[i][j].d[k];
  for (int pass = 0; pass < 3; ++pass) {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k) {
          D1 s(0.0);
          for (int l = 0; l < 4; ++l) {
            if (pass == 0) s += ginv1[i][l] * da[l][j][k];
            if (pass == 1) s += ginv1[j][l] * da[i][l][k];
            if (pass == 2) s += ginv1[k][l] * da[i][j][l];
          }
          up[i][j][k] = s;
        }
    da = up;
  }
  Matrix4 deltad_up = Matrix4::Zero();
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 4; ++k) {
      double s = 0.0;
      for (int i = 0; i < 4; ++i) s += (sq1 * da[i][j][k]).d[i];
      deltad_up(j, k) = -s / sq1.v;
    }
  const Matrix4 deltad = g0 * deltad_up * g0.transpose();

  // dδα: (δα)^k = −(1/√g) ∂_j(√g α^{jk}), lowered, then d.
  Mat4<D2> aup = zero_mat4<D2>();
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 4; ++k)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) aup[j][k] += ginv2[j][a] * ginv2[k][b] * a2[a][b];
  Vec4<D1> delta_up;
  for (int k = 0; k < 4; ++k) {
    D1 s(0.0);
    for (int j = 0; j < 4; ++j) s += (sq2 * aup[j][k]).d[j];
    delta_up[k] = (D1(0.0) - s) / sq1;
  }
  Vec4<D1> delta;
  for (int a = 0; a < 4; ++a) {
    D1 s(0.0);
    for (int k = 0; k < 4; ++k) s += g1[a][k] * delta_up[k];
    delta[a] = s;
  }
  Matrix4 ddelta;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) ddelta(a, b) = delta[b].d[a] - delta[a].d[b];

  // ∇*∇α = −g^{dc} ∇_d∇_c α.
  std::array<std::array<std::array<D1, 4>, 4>, 4> gam1;  // Γ^k_ij
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        D1 s(0.0);
        for (int l = 0; l < 4; ++l)
          s += ginv1[k][l] * (0.5 * (g2[j][l].d[i] + g2[i][l].d[j] - g2[i][j].d[l]));
        gam1[k][i][j] = s;
      }
  T3 na;  // na[c][a][b] = ∇_c α_ab
  for (int c = 0; c < 4; ++c)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        D1 s = a2[a][b].d[c];
        for (int e = 0; e < 4; ++e) s -= gam1[e][c][a] * a1[e][b] + gam1[e][c][b] * a1[a][e];
        na[c][a][b] = s;
      }
  Matrix4 rough = Matrix4::Zero();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      double s = 0.0;
      for (int d = 0; d < 4; ++d)
        for (int c = 0; c < 4; ++c) {
          double nn = na[c][a][b].d[d];
          for (int e = 0; e < 4; ++e)
            nn -= gam1[e][d][c].v * na[e][a][b].v + gam1[e][d][a].v * na[c][e][b].v +
                  gam1[e][d][b].v * na[c][a][e].v;
          s += ginv0(d, c) * nn;
        }
      rough(a, b) = -s;
    }

  Matrix4 alpha0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) alpha0(i, j) = a1[i][j].v;

  const CurvatureFrameData c = riemann_at(m, chart, p);
  const Decomposition dec = decompose(c);
  WeitzenboeckTerms t;
  t.alpha = to_frame(alpha0, c.frame);
  t.hodge_laplacian = to_frame(deltad + ddelta, c.frame);
  t.rough_laplacian = to_frame(rough, c.frame);
  t.weyl_term = dec.weyl * t.alpha;
  t.s = c.s;
  t.residual =
      (t.hodge_laplacian - (t.rough_laplacian - 2.0 * t.weyl_term + c.s / 3.0 * t.alpha)).norm();
  return t;
}

}  // namespace curv4
