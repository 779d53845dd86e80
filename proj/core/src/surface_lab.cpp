#include "curv4/surface_lab.hpp"

#include "curv4/quadrature.hpp"
#include "curv4/small_matrix.hpp"
#include "curv4/spherical_harmonics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <exception>
#include <memory>
#include <numbers>
#include <regex>
#include <thread>

namespace curv4 {

namespace {

constexpr double kTolMinimal = 1e-8;

template <typename T>
Vec4<T> unit(int k) {
  Vec4<T> e{T(0.0), T(0.0), T(0.0), T(0.0)};
  e[k] = T(1.0);
  return e;
}

template <typename T>
T var(double x, int k);

template <>
S1 var<S1>(double x, int k) {
  S1 r(x);
  r.d[k] = 1.0;
  return r;
}
template <>
S2 var<S2>(double x, int k) {
  S2 r(var<S1>(x, k));
  r.d[k] = S1(1.0);
  return r;
}
template <>
S3 var<S3>(double x, int k) {
  S3 r(var<S2>(x, k));
  r.d[k] = S2(1.0);
  return r;
}

}  // namespace

SpherePoint sphere_chart_of(double x, double y, double z) {
  if (z <= 0.0) {
    const double d = 1.0 - z;
    return {0, x / d, y / d};
  }
  const double d = 1.0 + z;
  return {1, x / d, -y / d};
}

SurfaceImmersion::SurfaceImmersion(SurfaceKind kind, std::string name, std::map<std::string, double> parameters)
    : kind_(kind), name_(std::move(name)), parameters_(std::move(parameters)) {
  auto get = [&](const char* k, double def) {
    auto it = parameters_.find(k);
    return it == parameters_.end() ? def : it->second;
  };
  qx_ = get("qx", 0.0);
  qy_ = get("qy", 0.0);
  delta_ = get("delta", 0.0);
  factor_ = static_cast<int>(get("factor", 1.0));
  switch (kind_) {
    case SurfaceKind::Slice:
    case SurfaceKind::PerturbedSlice:
      if (factor_ == 1) {
        ambient_chart_ = {0, 2};
        normal_seeds_ = {2, 3};
      } else {
        ambient_chart_ = {0, 1};
        normal_seeds_ = {0, 1};
      }
      break;
    case SurfaceKind::Equator:
    case SurfaceKind::ComplexLine:
      ambient_chart_ = {0, 1};
      normal_seeds_ = {2, 3};
      break;
  }
}

bool SurfaceImmersion::compatible_with(const MetricField& m) const {
  switch (kind_) {
    case SurfaceKind::Slice:
    case SurfaceKind::PerturbedSlice:
      return std::holds_alternative<KaehlerProductModel>(m.model());
    case SurfaceKind::Equator:
      return std::holds_alternative<RoundSphereModel>(m.model());
    case SurfaceKind::ComplexLine:
      return std::holds_alternative<FubiniStudyModel>(m.model());
  }
  return false;
}

template <typename T>
Vec4<T> SurfaceImmersion::map(int chart, const T& u, const T& v) const {
  const T zero(0.0);
  switch (kind_) {
    case SurfaceKind::Slice:
      if (factor_ == 1) return {u, v, T(qx_), T(qy_)};
      return {T(qx_), T(qy_), u, v};
    case SurfaceKind::PerturbedSlice: {
      const auto p = sphere_point(chart, u, v);
      const T a = qx_ + delta_ * (p[0] + 0.3 * p[2] * p[2]);
      const T b = qy_ + delta_ * (p[1] - 0.2 * p[0] * p[2]);
      return {u, v, a, b};
    }
    case SurfaceKind::Equator:
      if (chart == 0) return {u, v, zero, zero};
      return {u, zero - v, zero, zero};
    case SurfaceKind::ComplexLine:
      return {u, v, zero, zero};
  }
  return {zero, zero, zero, zero};
}

template <typename T>
std::vector<Vec4<T>> SurfaceImmersion::generators(int chart, const T& u, const T& v) const {
  auto scaled = [](const T& f, int k) {
    Vec4<T> e = unit<T>(k);
    e[k] = f;
    return e;
  };
  switch (kind_) {
    case SurfaceKind::Slice:
    case SurfaceKind::PerturbedSlice:
      return {unit<T>(normal_seeds_[0]), unit<T>(normal_seeds_[1])};
    case SurfaceKind::Equator: {
      const T f = 0.5 * (1.0 + u * u + v * v);
      if (chart == 0) return {scaled(f, 2), scaled(f, 3)};
      return {scaled(f, 2), scaled(T(0.0) - f, 3)};
    }
    case SurfaceKind::ComplexLine: {
      const T zero(0.0);
      // real forms of the holomorphic fields ∂z₂ and z ∂z₂ (times 1 and i)
      const Vec4<T> z_re{zero, zero, u, v};
      const Vec4<T> z_im{zero, zero, zero - v, u};
      if (chart == 0) return {unit<T>(2), unit<T>(3), z_re, z_im};
      return {z_re, z_im, unit<T>(2), unit<T>(3)};
    }
  }
  return {};
}

template Vec4<double> SurfaceImmersion::map<double>(int, const double&, const double&) const;
template Vec4<S2> SurfaceImmersion::map<S2>(int, const S2&, const S2&) const;
template Vec4<S3> SurfaceImmersion::map<S3>(int, const S3&, const S3&) const;
template std::vector<Vec4<double>> SurfaceImmersion::generators<double>(int, const double&,
                                                                        const double&) const;
template std::vector<Vec4<S2>> SurfaceImmersion::generators<S2>(int, const S2&, const S2&) const;

SurfaceImmersion product_slice(int factor, double qx, double qy) {
  if (factor != 1 && factor != 2) throw SpecError("slice: factor must be 1 or 2");
  if (qx * qx + qy * qy > 1.0) throw SpecError("slice: point must satisfy |q| <= 1");
  return SurfaceImmersion(SurfaceKind::Slice, "slice",
                          {{"factor", static_cast<double>(factor)}, {"qx", qx}, {"qy", qy}});
}

SurfaceImmersion perturbed_slice(double delta, double qx, double qy) {
  if (qx * qx + qy * qy > 1.0) throw SpecError("perturbed-slice: point must satisfy |q| <= 1");
  if (std::abs(delta) > 0.5) throw SpecError("perturbed-slice: |delta| must be at most 0.5");
  return SurfaceImmersion(SurfaceKind::PerturbedSlice, "perturbed-slice",
                          {{"factor", 1.0}, {"delta", delta}, {"qx", qx}, {"qy", qy}});
}

SurfaceImmersion equator_s4() { return SurfaceImmersion(SurfaceKind::Equator, "equator4", {}); }

SurfaceImmersion complex_line() { return SurfaceImmersion(SurfaceKind::ComplexLine, "cp1-line", {}); }

SurfaceImmersion parse_surface_spec(const std::string& spec) {
  std::string s;
  for (char c : spec)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s == "equator4" || s == "equator4()") return equator_s4();
  if (s == "cp1-line" || s == "cp1-line()") return complex_line();
  const std::regex call(R"(([a-z-]+)(?:\((.*)\))?)");
  std::smatch mm;
  if (!std::regex_match(s, mm, call)) throw SpecError("malformed surface spec: " + spec);
  const std::string name = mm[1];
  const std::string args = mm[2];
  if (name != "slice" && name != "perturbed-slice") throw SpecError("unknown surface: " + name);
  double factor = 1.0, qx = 0.0, qy = 0.0, delta = 0.2;
  const std::regex kv(R"(([a-z]+)=(\([^)]*\)|[^,]+))");
  std::string rest = args;
  for (std::sregex_iterator it(args.begin(), args.end(), kv), end; it != end; ++it) {
    const std::string key = (*it)[1], val = (*it)[2];
    try {
      if (key == "factor" && name == "slice") {
        factor = std::stod(val);
      } else if (key == "delta" && name == "perturbed-slice") {
        delta = std::stod(val);
      } else if (key == "point") {
        std::smatch pm;
        const std::regex pt(R"(\(([^,]+),([^,]+)\))");
        if (!std::regex_match(val, pm, pt)) throw SpecError("point must be (x,y)");
        qx = std::stod(pm[1]);
        qy = std::stod(pm[2]);
      } else {
        throw SpecError("unknown parameter '" + key + "' for " + name);
      }
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const SpecError*>(&e)) throw;
      throw SpecError("bad value for '" + key + "': " + val);
    }
    rest.erase(rest.find(it->str()), it->str().size());
  }
  rest.erase(std::remove(rest.begin(), rest.end(), ','), rest.end());
  if (!rest.empty()) throw SpecError("malformed surface arguments: " + args);
  if (name == "slice") {
    if (factor != 1.0 && factor != 2.0) throw SpecError("slice: factor must be 1 or 2");
    return product_slice(static_cast<int>(factor), qx, qy);
  }
  return perturbed_slice(delta, qx, qy);
}

namespace {

template <typename T>
T gdot(const Mat4<T>& g, const Vec4<T>& a, const Vec4<T>& b) {
  T s(0.0);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) s += g[i][j] * a[i] * b[j];
  return s;
}

template <typename T>
Vec4<T> axpy(const Vec4<T>& x, const T& a, const Vec4<T>& y) {  // x + a y
  Vec4<T> r;
  for (int i = 0; i < 4; ++i) r[i] = x[i] + a * y[i];
  return r;
}

template <typename T>
Vec4<T> scale(const Vec4<T>& x, const T& a) {
  Vec4<T> r;
  for (int i = 0; i < 4; ++i) r[i] = a * x[i];
  return r;
}

template <typename T>
Vec4<S1> lower1(const Vec4<T>& x) {
  Vec4<S1> r;
  for (int i = 0; i < 4; ++i) r[i] = x[i].v;
  return r;
}

double val(const S2& x) { return x.v.v; }

}  // namespace

SurfacePointData surface_point(const SurfaceImmersion& s, const MetricField& m, int chart, double u, double v) {
  if (chart != 0 && chart != 1) throw SpecError("surface chart must be 0 or 1");
  if (!s.compatible_with(m)) throw SpecError("surface " + s.name() + " does not live in metric " + m.name());
  const int ac = s.ambient_chart(chart);
  SurfacePointData out;
  InducedGeometry& geo = out.geom;
  geo.chart = chart;
  geo.u = u;
  geo.v = v;
  geo.ambient_chart = ac;

  const Vec4<S3> x3 = s.map<S3>(chart, var<S3>(u, 0), var<S3>(v, 1));
  Vec4<S2> x2;
  std::array<Vec4<S2>, 2> xa2;
  for (int i = 0; i < 4; ++i) {
    x2[i] = x3[i].v;
    for (int a = 0; a < 2; ++a) xa2[a][i] = x3[i].d[a];
  }
  for (int i = 0; i < 4; ++i) {
    geo.x[i] = val(x2[i]);
    for (int a = 0; a < 2; ++a) geo.differential(i, a) = val(xa2[a][i]);
  }

  const Mat4<S2> g2 = m.eval_t<S2>(ac, x2);
  out.metric_jets = g2;

  // Christoffel symbols along the surface (first order in u, v).
  using A1 = Dual<S1, 4>;
  Vec4<A1> y;
  for (int k = 0; k < 4; ++k) {
    y[k].v = x2[k].v;
    y[k].d[k] = S1(1.0);
  }
  const Mat4<A1> ga = m.eval_t<A1>(ac, y);
  Mat4<S1> g1;
  std::array<Mat4<S1>, 4> dg1;  // dg1[k][i][j] = ∂_k g_ij
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      g1[i][j] = ga[i][j].v;
      for (int k = 0; k < 4; ++k) dg1[k][i][j] = ga[i][j].d[k];
    }
  const Mat4<S1> ginv1 = inverse_spd(g1);
  std::array<Mat4<S1>, 4> gam;  // gam[k][i][j] = Γ^k_ij
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        S1 acc(0.0);
        for (int l = 0; l < 4; ++l) acc += ginv1[k][l] * (0.5 * (dg1[i][j][l] + dg1[j][i][l] - dg1[l][i][j]));
        gam[k][i][j] = acc;
      }

  // Adapted frame by Gram–Schmidt (second-order jets).
  const S2 n1 = sqrt(gdot(g2, xa2[0], xa2[0]));
  const Vec4<S2> e1 = scale(xa2[0], S2(1.0) / n1);
  const S2 p = gdot(g2, xa2[1], e1);
  const Vec4<S2> w2 = axpy(xa2[1], S2(0.0) - p, e1);
  const S2 n2 = sqrt(gdot(g2, w2, w2));
  const Vec4<S2> e2 = scale(w2, S2(1.0) / n2);
  std::array<Vec4<S2>, 4> e{e1, e2, e1, e1};
  for (int k = 0; k < 2; ++k) {
    Vec4<S2> w = unit<S2>(s.normal_seeds()[k]);
    for (int b = 0; b < 2 + k; ++b) w = axpy(w, S2(0.0) - gdot(g2, w, e[b]), e[b]);
    const S2 nw = sqrt(gdot(g2, w, w));
    if (val(nw) < 1e-10) throw GeometryError("normal frame seed is tangent");
    e[2 + k] = scale(w, S2(1.0) / nw);
  }
  Matrix4 ev;
  for (int a = 0; a < 4; ++a)
    for (int i = 0; i < 4; ++i) ev(i, a) = val(e[a][i]);
  if (ev.determinant() < 0.0) {
    for (int i = 0; i < 4; ++i) e[3][i] = S2(0.0) - e[3][i];
    ev.col(3) *= -1.0;
  }
  geo.frame.e = ev;
  geo.frame.tangent_coeffs << 1.0 / val(n1), -val(p) / (val(n1) * val(n2)), 0.0, 1.0 / val(n2);
  out.normal_jets = {e[2], e[3]};

  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      out.first_form_jets[a][b] = gdot(g1, lower1(xa2[a]), lower1(xa2[b]));
      geo.first_form(a, b) = out.first_form_jets[a][b].v;
    }
  if (geo.first_form.determinant() <= 0.0) throw GeometryError("rank-deficient differential");
  geo.area_element = std::sqrt(geo.first_form.determinant());
  const Matrix2& c = geo.frame.tangent_coeffs;

  // Normal connection form ω(∂_a) = ⟨∇_{∂_a} e₃, e₄⟩ as first-order jets.
  const Vec4<S1> e3 = lower1(e[2]);
  const Vec4<S1> e4 = lower1(e[3]);
  std::array<S1, 2> om;
  for (int a = 0; a < 2; ++a) {
    const Vec4<S1> xa = lower1(xa2[a]);
    Vec4<S1> de3;
    for (int k = 0; k < 4; ++k) {
      S1 acc = e[2][k].d[a];
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) acc += gam[k][i][j] * xa[i] * e3[j];
      de3[k] = acc;
    }
    om[a] = gdot(g1, de3, e4);
  }
  for (int i = 0; i < 2; ++i) out.omega[i] = c(0, i) * om[0].v + c(1, i) * om[1].v;
  out.k_perp_intrinsic = -(om[1].d[0] - om[0].d[1]) / geo.area_element;

  // Second fundamental form.
  std::array<Matrix2, 2> acoord;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      Vector4 h;
      for (int k = 0; k < 4; ++k) {
        double acc = x3[k].d[a].d[b].v;
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j) acc += gam[k][i][j].v * geo.differential(i, a) * geo.differential(j, b);
        h[k] = acc;
      }
      const Matrix4 g0 = to_eigen_value(g2);
      for (int al = 0; al < 2; ++al) acoord[al](a, b) = h.dot(g0 * ev.col(2 + al));
    }
  SecondFundamentalForm& sff = out.sff;
  for (int al = 0; al < 2; ++al) {
    sff.a[al] = c.transpose() * acoord[al] * c;
    sff.a[al] = 0.5 * (sff.a[al] + sff.a[al].transpose());
    sff.mean_curvature[al] = sff.a[al].trace();
  }
  sff.shape_norm3 = sff.a[0].squaredNorm();
  sff.shape_norm4 = sff.a[1].squaredNorm();
  sff.minimality_residual = sff.mean_curvature.norm();

  out.curvature = riemann_at(m, ac, geo.x, ev);
  out.k_perp_extrinsic = k_perp_extrinsic(sff, out.curvature.riemann);
  return out;
}

InducedGeometry induced_geometry(const SurfaceImmersion& s, const MetricField& m, int chart, double u, double v) {
  return surface_point(s, m, chart, u, v).geom;
}

SecondFundamentalForm second_fundamental(const SurfaceImmersion& s, const MetricField& m, int chart, double u,
                                         double v) {
  return surface_point(s, m, chart, u, v).sff;
}

double k_perp_intrinsic(const SurfaceImmersion& s, const MetricField& m, int chart, double u, double v) {
  return surface_point(s, m, chart, u, v).k_perp_intrinsic;
}

double k_perp_extrinsic(const SurfaceImmersion& s, const MetricField& m, int chart, double u, double v) {
  return surface_point(s, m, chart, u, v).k_perp_extrinsic;
}

double k_perp_extrinsic(const SecondFundamentalForm& a, const CurvatureLike& r) {
  const auto& a3 = a.a[0];
  const auto& a4 = a.a[1];
  return component(r, 0, 1, 2, 3) + a3.row(0).dot(a4.row(1)) - a4.row(0).dot(a3.row(1));
}

std::array<S2, 2> normal_components(const SurfacePointData& p, const Vec4<S2>& field) {
  return {gdot(p.metric_jets, field, p.normal_jets[0]), gdot(p.metric_jets, field, p.normal_jets[1])};
}

std::array<S2, 2> coordinate_jets(const SurfacePointData& p) {
  return {var<S2>(p.geom.u, 0), var<S2>(p.geom.v, 1)};
}

SectionJet section_jet_from_field(const SurfacePointData& p, const Vec4<S2>& field) {
  const auto a = normal_components(p, field);
  return section_jet_from_coefficients(p, a[0], a[1]);
}

SectionJet section_jet_from_coefficients(const SurfacePointData& p, const S2& a3, const S2& a4) {
  SectionJet j;
  j.a3 = a3;
  j.a4 = a4;
  j.a = {val(j.a3), val(j.a4)};
  const Matrix2& c = p.geom.frame.tangent_coeffs;
  Matrix2 dcoord;
  for (int a = 0; a < 2; ++a) {
    dcoord(0, a) = j.a3.d[a].v;
    dcoord(1, a) = j.a4.d[a].v;
  }
  j.da = dcoord * c;
  for (int i = 0; i < 2; ++i) {
    j.nabla(0, i) = j.da(0, i) - p.omega[i] * j.a[1];
    j.nabla(1, i) = j.da(1, i) + p.omega[i] * j.a[0];
  }
  return j;
}

SectionJet section_jet(const SurfacePointData& p, const NormalSection& sigma) {
  return section_jet_from_field(p, sigma.field(p.geom.chart, var<S2>(p.geom.u, 0), var<S2>(p.geom.v, 1)));
}

SectionJet rotate(const SectionJet& j) {
  SectionJet r;
  r.a = {-j.a[1], j.a[0]};
  r.da.row(0) = -j.da.row(1);
  r.da.row(1) = j.da.row(0);
  r.nabla.row(0) = -j.nabla.row(1);
  r.nabla.row(1) = j.nabla.row(0);
  r.a3 = S2(0.0) - j.a4;
  r.a4 = j.a3;
  return r;
}

Vector2 normal_connection(const SurfaceImmersion& s, const MetricField& m, const NormalSection& sigma,
                          const Vector2& x, int chart, double u, double v) {
  return section_jet(surface_point(s, m, chart, u, v), sigma).nabla * x;
}

double dbar_perp_sq(const SectionJet& j, double theta) {
  const Vector2 e{std::cos(theta), std::sin(theta)};
  const Vector2 ie{-std::sin(theta), std::cos(theta)};
  const Vector2 d = j.nabla * e;
  const Vector2 di = j.nabla * ie;
  const Vector2 sum{d[0] - di[1], d[1] + di[0]};
  return 0.5 * sum.squaredNorm();
}

double dbar_perp_sq(const SurfaceImmersion& s, const MetricField& m, const NormalSection& sigma, int chart,
                    double u, double v, double theta) {
  return dbar_perp_sq(section_jet(surface_point(s, m, chart, u, v), sigma), theta);
}

double a_wedge_a_sq(const SecondFundamentalForm& a) {
  const auto& a3 = a.a[0];
  const auto& a4 = a.a[1];
  return (a3.row(0) - a4.row(1)).squaredNorm() + (a3.row(1) + a4.row(0)).squaredNorm();
}

double a_wedge_a_sq_expanded(const SecondFundamentalForm& a) {
  const auto& a3 = a.a[0];
  const auto& a4 = a.a[1];
  return a.shape_norm3 + a.shape_norm4 - 2.0 * a3.row(0).dot(a4.row(1)) + 2.0 * a4.row(0).dot(a3.row(1));
}

double self_dual_pairing(const CurvatureFrameData& c) {
  Bivector6 eta = Bivector6::Zero();
  eta[0] = 1.0;
  eta[5] = 1.0;
  const Eigen::Matrix<double, 6, 3> pp = eta_change_of_basis().leftCols<3>();
  const Vector3 y = pp.transpose() * eta;
  return c.s / 6.0 * eta.squaredNorm() - y.dot(c.w_plus * y);
}

double self_dual_pairing_normal(const CurvatureFrameData& c) {
  const auto& r = c.riemann;
  double ric = 0.0;
  for (int k = 0; k < 2; ++k) ric += component(r, k, 2, k, 2) + component(r, k, 3, k, 3);
  return -2.0 * component(r, 0, 1, 2, 3) + ric;
}

std::vector<SurfacePointData> sample_surface(const SurfaceImmersion& s, const MetricField& m,
                                             const SurfaceQuadrature& quad, int threads) {
  if (quad.polar < 2 || quad.azimuthal < 4) throw SpecError("surface quadrature too coarse");
  const QuadratureRule zr = gauss_legendre(quad.polar, -1.0, 1.0);
  struct Node {
    SpherePoint sp;
    double w;
  };
  std::vector<Node> nodes;
  nodes.reserve(static_cast<std::size_t>(quad.polar) * quad.azimuthal);
  const double dphi = 2.0 * std::numbers::pi / quad.azimuthal;
  for (int i = 0; i < quad.polar; ++i) {
    const double z = zr.nodes[i];
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    for (int j = 0; j < quad.azimuthal; ++j) {
      const double phi = (j + 0.5) * dphi;
      const SpherePoint sp = sphere_chart_of(rho * std::cos(phi), rho * std::sin(phi), z);
      const double r2 = sp.u * sp.u + sp.v * sp.v;
      // du dv = (1+|ζ|²)²/4 dA_round
      nodes.push_back({sp, zr.weights[i] * dphi * 0.25 * (1.0 + r2) * (1.0 + r2)});
    }
  }
  std::vector<SurfacePointData> out(nodes.size());
  auto run = [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      out[k] = surface_point(s, m, nodes[k].sp.chart, nodes[k].sp.u, nodes[k].sp.v);
      out[k].weight = nodes[k].w * out[k].geom.area_element;
    }
  };
  const std::size_t n = nodes.size();
  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, n);
  if (workers == 1) {
    run(0, n);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          run(n * w / workers, n * (w + 1) / workers);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  return out;
}

namespace {

template <typename F>
double integrate(const std::vector<SurfacePointData>& nodes, F&& f) {
  std::vector<double> terms(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) terms[k] = nodes[k].weight * f(nodes[k]);
  return pairwise_sum(terms);
}

void require_minimal(const std::vector<SurfacePointData>& nodes) {
  const double r = max_minimality_residual(nodes);
  if (r >= kTolMinimal)
    throw GeometryError("surface is not minimal (max |H| = " + std::to_string(r) + ")");
}

}  // namespace

double area(const std::vector<SurfacePointData>& nodes) {
  return integrate(nodes, [](const SurfacePointData&) { return 1.0; });
}

double chern_number(const std::vector<SurfacePointData>& nodes) {
  return integrate(nodes, [](const SurfacePointData& p) { return p.k_perp_intrinsic; }) /
         (2.0 * std::numbers::pi);
}

double chern_number(const SurfaceImmersion& s, const MetricField& m, const SurfaceQuadrature& quad) {
  return chern_number(sample_surface(s, m, quad));
}

double max_minimality_residual(const std::vector<SurfacePointData>& nodes) {
  double r = 0.0;
  for (const auto& p : nodes) r = std::max(r, p.sff.minimality_residual);
  return r;
}

double second_variation_density(const SurfacePointData& p, const SectionJet& j, const VariationOptions& opt) {
  const double grad = j.nabla.squaredNorm();
  double curv = 0.0;
  if (opt.curvature_override) {
    curv = 2.0 * *opt.curvature_override * j.a.squaredNorm();
  } else {
    const auto& r = p.curvature.riemann;
    for (int k = 0; k < 2; ++k)
      for (int al = 0; al < 2; ++al)
        for (int be = 0; be < 2; ++be) curv += j.a[al] * j.a[be] * component(r, k, 2 + al, k, 2 + be);
  }
  const Matrix2 as = j.a[0] * p.sff.a[0] + j.a[1] * p.sff.a[1];
  return grad - curv - as.squaredNorm();
}

double averaged_variation_density(const SurfacePointData& p, const SectionJet& j) {
  return 4.0 * dbar_perp_sq(j) -
         (self_dual_pairing(p.curvature) + a_wedge_a_sq(p.sff)) * j.a.squaredNorm();
}

double second_variation(const std::vector<SurfacePointData>& nodes, const NormalSection& sigma,
                        const VariationOptions& opt) {
  require_minimal(nodes);
  return integrate(nodes, [&](const SurfacePointData& p) {
    return second_variation_density(p, section_jet(p, sigma), opt);
  });
}

double second_variation(const SurfaceImmersion& s, const MetricField& m, const NormalSection& sigma,
                        const SurfaceQuadrature& quad) {
  return second_variation(sample_surface(s, m, quad), sigma);
}

IdentityResult variational_identity_31x(const std::vector<SurfacePointData>& nodes, const NormalSection& sigma) {
  std::vector<SectionJet> jets(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) jets[k] = section_jet(nodes[k], sigma);
  std::vector<double> l(nodes.size()), r(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto& j = jets[k];
    l[k] = nodes[k].weight * j.nabla.squaredNorm();
    r[k] = nodes[k].weight * (2.0 * dbar_perp_sq(j) + nodes[k].k_perp_intrinsic * j.a.squaredNorm());
  }
  IdentityResult out;
  out.lhs = pairwise_sum(l);
  out.rhs = pairwise_sum(r);
  out.residual = std::abs(out.lhs - out.rhs);
  return out;
}

WeitzenboeckVariation weitzenboeck_variation(const std::vector<SurfacePointData>& nodes,
                                             const NormalSection& sigma, bool identity_only) {
  if (!identity_only) require_minimal(nodes);
  const std::size_t n = nodes.size();
  std::vector<double> lhs(n), dbar(n), pair(n), aa(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& p = nodes[k];
    const SectionJet j = section_jet(p, sigma);
    const double w = p.weight;
    const double norm2 = j.a.squaredNorm();
    lhs[k] = w * (second_variation_density(p, j) + second_variation_density(p, rotate(j)));
    dbar[k] = w * 4.0 * dbar_perp_sq(j);
    pair[k] = w * self_dual_pairing(p.curvature) * norm2;
    aa[k] = w * a_wedge_a_sq(p.sff) * norm2;
  }
  WeitzenboeckVariation out;
  out.lhs = pairwise_sum(lhs);
  out.dbar_term = pairwise_sum(dbar);
  out.pairing_term = pairwise_sum(pair);
  out.a_wedge_a_term = pairwise_sum(aa);
  out.rhs = out.dbar_term - out.pairing_term - out.a_wedge_a_term;
  out.residual = std::abs(out.lhs - out.rhs);
  return out;
}

LogNormCheck log_norm_check(const std::vector<SurfacePointData>& nodes, const NormalSection& sigma,
                            bool enforce_preconditions) {
  LogNormCheck out;
  out.min_norm = std::numeric_limits<double>::infinity();
  std::vector<double> residuals(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto& p = nodes[k];
    const SectionJet j = section_jet(p, sigma);
    out.max_dbar = std::max(out.max_dbar, std::sqrt(dbar_perp_sq(j)));
    out.min_norm = std::min(out.min_norm, j.a.norm());
    const S2 f = log(j.a3 * j.a3 + j.a4 * j.a4);
    const auto& ij = p.first_form_jets;
    const S1 det = ij[0][0] * ij[1][1] - ij[0][1] * ij[1][0];
    const S1 sq = sqrt(det);
    const S1 inv[2][2] = {{ij[1][1] / det, S1(0.0) - ij[0][1] / det},
                          {S1(0.0) - ij[1][0] / det, ij[0][0] / det}};
    double div = 0.0;
    for (int a = 0; a < 2; ++a) {
      S1 flux(0.0);
      for (int b = 0; b < 2; ++b) flux += inv[a][b] * f.d[b];
      div += (sq * flux).d[a];
    }
    const double lap = div / sq.v;
    residuals[k] = std::abs(p.k_perp_intrinsic + 0.5 * lap);
  }
  if (enforce_preconditions) {
    if (out.min_norm <= 1e-3) throw GeometryError("log_norm_check: section vanishes on the grid");
    if (out.max_dbar >= 1e-6) throw GeometryError("log_norm_check: section is not holomorphic at tolerance");
  }
  for (double r : residuals) out.residual = std::max(out.residual, r);
  return out;
}

NormalSection generator_section(const SurfaceImmersion& s, const MetricField& m, int k, bool normalize) {
  if (k < 0 || k >= s.generator_count()) throw SpecError("generator index out of range");
  return NormalSection{[s, m, k, normalize](int chart, const S2& u, const S2& v) {
    Vec4<S2> f = s.generators<S2>(chart, u, v)[k];
    if (normalize) {
      const Mat4<S2> g = m.eval_t<S2>(s.ambient_chart(chart), s.map<S2>(chart, u, v));
      f = scale(f, S2(1.0) / sqrt(gdot(g, f, f)));
    }
    return f;
  }};
}

int harmonic_section_size(const SurfaceImmersion& s, int max_degree) {
  return (max_degree + 1) * (max_degree + 1) * s.generator_count();
}

NormalSection harmonic_section(const SurfaceImmersion& s, int max_degree, const std::vector<double>& coeffs) {
  if (static_cast<int>(coeffs.size()) != harmonic_section_size(s, max_degree))
    throw SpecError("harmonic_section: coefficient count mismatch");
  auto harm = std::make_shared<SphericalHarmonics>(max_degree);
  return NormalSection{[s, harm, coeffs](int chart, const S2& u, const S2& v) {
    const auto p = sphere_point(chart, u, v);
    const std::vector<S2> y = harm->evaluate(p[0], p[1], p[2]);
    const auto gens = s.generators<S2>(chart, u, v);
    const int ng = static_cast<int>(gens.size());
    Vec4<S2> f{S2(0.0), S2(0.0), S2(0.0), S2(0.0)};
    for (std::size_t h = 0; h < y.size(); ++h)
      for (int j = 0; j < ng; ++j) {
        const double c = coeffs[h * ng + j];
        if (c == 0.0) continue;
        f = axpy(f, c * y[h], gens[j]);
      }
    return f;
  }};
}

}  // namespace curv4
