#include "curv4/metric_library.hpp"

#include "curv4/curvature_engine.hpp"
#include "curv4/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>

namespace curv4 {

namespace {

std::vector<Chart> make_atlas(const MetricModel& model) {
  return std::visit(
      [](const auto& m) {
        std::vector<Chart> atlas;
        for (int c = 0; c < m.chart_count; ++c) {
          atlas.push_back({c, "chart" + std::to_string(c), m.domain()});
        }
        return atlas;
      },
      model);
}

std::optional<KaehlerStructure> make_kaehler(const MetricModel& model) {
  if (const auto* km = std::get_if<KaehlerProductModel>(&model)) {
    const KaehlerProductModel copy = *km;
    return KaehlerStructure{
        [](int, const Point4&) { return standard_complex_structure(); },
        [copy](int chart, const Point4& x) { return copy.potential<double>(chart, x).phi; }};
  }
  if (std::holds_alternative<FubiniStudyModel>(model)) {
    return KaehlerStructure{
        [](int, const Point4&) { return standard_complex_structure(); },
        [](int chart, const Point4& x) { return FubiniStudyModel{}.potential<double>(chart, x).phi; }};
  }
  return std::nullopt;
}

}  // namespace

MetricField::MetricField(std::string name, std::map<std::string, double> parameters, MetricModel model)
    : name_(std::move(name)),
      parameters_(std::move(parameters)),
      model_(std::move(model)),
      atlas_(make_atlas(model_)),
      kaehler_(make_kaehler(model_)) {}

void MetricField::check_chart(int chart) const {
  if (chart < 0 || chart >= static_cast<int>(atlas_.size())) {
    throw GeometryError("chart id " + std::to_string(chart) + " not in atlas of " + name_);
  }
}

Matrix4 MetricField::eval(int chart, const Point4& p) const {
  check_chart(chart);
  return to_eigen_value(eval_t<double>(chart, p));
}

MetricJets MetricField::jets(int chart, const Point4& p) const {
  check_chart(chart);
  const Mat4<D2> g = eval_t<D2>(chart, seed2(p));
  MetricJets j;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      const D2& e = g[a][b];
      j.g(a, b) = e.v.v;
      for (int k = 0; k < 4; ++k) {
        j.dg[k](a, b) = e.v.d[k];
        for (int l = 0; l < 4; ++l) j.ddg[l][k](a, b) = e.d[l].d[k];
      }
    }
  }
  return j;
}

std::array<Matrix4, 4> MetricField::deriv1(int chart, const Point4& p) const {
  check_chart(chart);
  const Mat4<D1> g = eval_t<D1>(chart, seed1(p));
  std::array<Matrix4, 4> dg;
  for (int k = 0; k < 4; ++k)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) dg[k](a, b) = g[a][b].d[k];
  return dg;
}

std::array<std::array<Matrix4, 4>, 4> MetricField::deriv2(int chart, const Point4& p) const {
  return jets(chart, p).ddg;
}

std::optional<Point4> MetricField::transition(int from, int to, const Point4& p) const {
  check_chart(from);
  check_chart(to);
  return transition_t<double>(from, to, p);
}

std::optional<Matrix4> MetricField::transition_jacobian(int from, int to, const Point4& p) const {
  check_chart(from);
  check_chart(to);
  const auto y = transition_t<D1>(from, to, seed1(p));
  if (!y) return std::nullopt;
  Matrix4 jac;
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) jac(i, k) = (*y)[i].d[k];
  return jac;
}

MetricField flat_metric() { return MetricField("flat", {}, FlatModel{}); }

MetricField round_sphere4(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw SpecError("round_sphere4: radius must be positive");
  }
  return MetricField("round4", {{"r", radius}}, RoundSphereModel{radius});
}

MetricField product_spheres(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw SpecError("product_spheres: radii must be positive");
  }
  KaehlerProductModel m;
  m.factor1 = a * a;
  m.factor2 = b * b;
  return MetricField("product", {{"a", a}, {"b", b}}, m);
}

namespace {

void check_t(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw SpecError("t must lie in [0, 1]");
}

PerturbationPotential parse_phi(const std::string& phi_id) {
  if (phi_id == "height-product") return PerturbationPotential::HeightProduct;
  throw SpecError("unknown perturbation potential '" + phi_id + "'");
}

KaehlerProductModel twisted_model(double t, double eps, PerturbationPotential phi) {
  const double c = 1.0 - t * t / 4.0;
  KaehlerProductModel m;
  m.factor1 = c;
  m.factor2 = 1.0 / c;
  m.eps = eps;
  m.phi = phi;
  return m;
}

constexpr int kValidationGrid = 16;

template <typename F>
void for_each_lattice_point(int n, F&& f) {
  std::vector<double> c(n);
  for (int i = 0; i < n; ++i) c[i] = -1.0 + 2.0 * i / (n - 1);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int d = 0; d < n; ++d)
        for (int e = 0; e < n; ++e) f(Point4{c[a], c[b], c[d], c[e]});
}

double min_eigen_over_grid(const KaehlerProductModel& m) {
  double lo = std::numeric_limits<double>::infinity();
  for (int chart = 0; chart < m.chart_count; ++chart) {
    for_each_lattice_point(kValidationGrid, [&](const Point4& x) {
      const Matrix4 g = to_eigen_value(m.metric<double>(chart, x));
      Eigen::SelfAdjointEigenSolver<Matrix4> es(g, Eigen::EigenvaluesOnly);
      lo = std::min(lo, es.eigenvalues()[0]);
    });
  }
  return lo;
}

bool stays_above(const KaehlerProductModel& m, double floor) {
  bool ok = true;
  for (int chart = 0; chart < m.chart_count && ok; ++chart) {
    for_each_lattice_point(kValidationGrid, [&](const Point4& x) {
      if (!ok) return;
      Matrix4 g = to_eigen_value(m.metric<double>(chart, x));
      g -= floor * Matrix4::Identity();
      Eigen::LLT<Matrix4> llt(g);
      if (llt.info() != Eigen::Success) ok = false;
    });
  }
  return ok;
}

double eps_limit_one_sign(double t, PerturbationPotential phi, double sign, double floor) {
  auto ok = [&](double e) { return stays_above(twisted_model(t, sign * e, phi), floor); };
  double lo = 0.0, hi = 0.05;
  while (ok(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e4) return hi;
  }
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

MetricField ht_metric(double t) {
  check_t(t);
  const double c = 1.0 - t * t / 4.0;
  KaehlerProductModel m;
  m.factor1 = c;
  m.factor2 = 1.0 / c;
  return MetricField("ht", {{"t", t}}, m);
}

double twisted_eps_max(double t, const std::string& phi_id) {
  check_t(t);
  const PerturbationPotential phi = parse_phi(phi_id);
  static std::mutex mu;
  static std::map<std::pair<double, std::string>, double> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find({t, phi_id}); it != cache.end()) return it->second;
  }
  const double floor = 1e-3 * min_eigen_over_grid(twisted_model(t, 0.0, phi));
  const double result = std::min(eps_limit_one_sign(t, phi, +1.0, floor),
                                 eps_limit_one_sign(t, phi, -1.0, floor));
  std::lock_guard<std::mutex> lock(mu);
  cache[{t, phi_id}] = result;
  return result;
}

MetricField twisted_metric(double t, double eps, const std::string& phi_id) {
  check_t(t);
  const PerturbationPotential phi = parse_phi(phi_id);
  if (!std::isfinite(eps)) throw SpecError("eps must be finite");
  if (eps != 0.0) {
    const double lim = twisted_eps_max(t, phi_id);
    if (std::abs(eps) >= lim) {
      std::ostringstream os;
      os << "twisted metric not positive definite on the validation grid: |eps| = " << std::abs(eps)
         << " >= eps_max(t) = " << lim;
      throw GeometryError(os.str());
    }
  }
  return MetricField("twisted", {{"t", t}, {"eps", eps}}, twisted_model(t, eps, phi));
}

MetricField fubini_study() { return MetricField("fubini-study", {}, FubiniStudyModel{}); }

double volume(const MetricField& m, const QuadratureSpec& quad) {
  if (quad.radial < 4 || quad.angular < 4) throw SpecError("quadrature resolution too small");
  const auto radial = gauss_legendre(quad.radial, 0.0, 1.0);
  const int na = quad.angular;
  const double dphi = 2.0 * std::numbers::pi / na;
  std::vector<double> contributions;
  auto density = [&](int chart, const Point4& x) { return std::sqrt(m.eval(chart, x).determinant()); };

  for (const auto& chart : m.atlas()) {
    std::vector<double> terms;
    switch (chart.domain) {
      case ChartDomain::Bidisk: {
        for (int i = 0; i < quad.radial; ++i)
          for (int a = 0; a < na; ++a)
            for (int j = 0; j < quad.radial; ++j)
              for (int b = 0; b < na; ++b) {
                const double r1 = radial.nodes[i], r2 = radial.nodes[j];
                const double t1 = a * dphi, t2 = b * dphi;
                const Point4 x{r1 * std::cos(t1), r1 * std::sin(t1), r2 * std::cos(t2), r2 * std::sin(t2)};
                const double w = radial.weights[i] * r1 * dphi * radial.weights[j] * r2 * dphi;
                terms.push_back(w * density(chart.id, x));
              }
        break;
      }
      case ChartDomain::Ball: {
        const auto polar = gauss_legendre(quad.radial, 0.0, std::numbers::pi / 2.0);
        for (int i = 0; i < quad.radial; ++i)
          for (int k = 0; k < quad.radial; ++k)
            for (int a = 0; a < na; ++a)
              for (int b = 0; b < na; ++b) {
                const double r = radial.nodes[i], eta = polar.nodes[k];
                const double x1 = a * dphi, x2 = b * dphi;
                const Point4 x{r * std::cos(eta) * std::cos(x1), r * std::cos(eta) * std::sin(x1),
                               r * std::sin(eta) * std::cos(x2), r * std::sin(eta) * std::sin(x2)};
                const double w = radial.weights[i] * r * r * r * polar.weights[k] * std::sin(eta) *
                                 std::cos(eta) * dphi * dphi;
                terms.push_back(w * density(chart.id, x));
              }
        break;
      }
      case ChartDomain::Box: {
        const auto rule = gauss_legendre(quad.radial, -1.0, 1.0);
        const int n = quad.radial;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
              for (int l = 0; l < n; ++l) {
                const Point4 x{rule.nodes[i], rule.nodes[j], rule.nodes[k], rule.nodes[l]};
                const double w = rule.weights[i] * rule.weights[j] * rule.weights[k] * rule.weights[l];
                terms.push_back(w * density(chart.id, x));
              }
        break;
      }
    }
    contributions.push_back(pairwise_sum(terms));
  }
  return pairwise_sum(contributions);
}

std::array<Matrix4, 4> covariant_derivative_of_j(const MetricField& m, int chart, const Point4& p) {
  if (!m.is_kaehler()) throw GeometryError("metric " + m.name() + " has no complex structure");
  const Matrix4 jm = m.kaehler()->complex_structure(chart, p);
  const auto gamma = christoffel(m, chart, p);
  std::array<Matrix4, 4> nabla;
  for (int k = 0; k < 4; ++k) {
    // J is constant in holomorphic coordinates.
    nabla[k] = gamma.of_direction(k) * jm - jm * gamma.of_direction(k);
  }
  return nabla;
}

KaehlerResiduals kaehler_residuals(const MetricField& m, const std::vector<SamplePoint>& grid) {
  if (!m.is_kaehler()) throw GeometryError("metric " + m.name() + " has no complex structure");
  KaehlerResiduals r;
  for (const auto& pt : grid) {
    const Matrix4 jm = m.kaehler()->complex_structure(pt.chart, pt.x);
    const Matrix4 g = m.eval(pt.chart, pt.x);
    r.j_squared = std::max(r.j_squared, (jm * jm + Matrix4::Identity()).norm());
    r.compatibility = std::max(r.compatibility, (jm.transpose() * g * jm - g).norm());
    for (const auto& nj : covariant_derivative_of_j(m, pt.chart, pt.x)) {
      r.parallel = std::max(r.parallel, nj.norm());
    }
  }
  return r;
}

std::vector<SamplePoint> lattice_grid(const MetricField& m, int n) {
  if (n < 2) throw SpecError("grid resolution must be at least 2");
  std::vector<SamplePoint> pts;
  for (const auto& chart : m.atlas()) {
    for_each_lattice_point(n, [&](const Point4& x) { pts.push_back({chart.id, x}); });
  }
  return pts;
}

std::vector<SamplePoint> random_points(const MetricField& m, int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> chart(0, static_cast<int>(m.atlas().size()) - 1);
  std::vector<SamplePoint> pts;
  pts.reserve(count);
  for (int i = 0; i < count; ++i) {
    SamplePoint p;
    p.chart = chart(rng);
    for (auto& c : p.x) c = u(rng);
    pts.push_back(p);
  }
  return pts;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double number(const std::map<std::string, std::string>& kv, const std::string& key, double fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw SpecError("");
    return v;
  } catch (const std::exception&) {
    throw SpecError("parameter '" + key + "' is not a number: '" + it->second + "'");
  }
}

void allow_only(const std::map<std::string, std::string>& kv, std::initializer_list<const char*> keys,
                const std::string& name) {
  for (const auto& [k, v] : kv) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
      throw SpecError("unknown parameter '" + k + "' for metric '" + name + "'");
    }
  }
}

}  // namespace

MetricField parse_metric_spec(const std::string& spec_in) {
  const std::string spec = trim(spec_in);
  std::string name = spec;
  std::map<std::string, std::string> kv;
  if (const auto open = spec.find('('); open != std::string::npos) {
    if (spec.back() != ')') throw SpecError("metric spec missing ')': " + spec);
    name = trim(spec.substr(0, open));
    const std::string body = spec.substr(open + 1, spec.size() - open - 2);
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw SpecError("expected key=value in metric spec: " + item);
      kv[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
    }
  }
  if (name == "flat") {
    allow_only(kv, {}, name);
    return flat_metric();
  }
  if (name == "round4") {
    allow_only(kv, {"r"}, name);
    return round_sphere4(number(kv, "r", 1.0));
  }
  if (name == "product") {
    allow_only(kv, {"a", "b"}, name);
    return product_spheres(number(kv, "a", 1.0), number(kv, "b", 1.0));
  }
  if (name == "ht") {
    allow_only(kv, {"t"}, name);
    return ht_metric(number(kv, "t", 0.0));
  }
  if (name == "twisted") {
    allow_only(kv, {"t", "eps", "phi"}, name);
    const auto phi = kv.count("phi") ? kv.at("phi") : std::string("height-product");
    return twisted_metric(number(kv, "t", 0.0), number(kv, "eps", 0.0), phi);
  }
  if (name == "fubini-study" || name == "fs") {
    allow_only(kv, {}, name);
    return fubini_study();
  }
  throw SpecError("unknown metric '" + name + "'");
}

}  // namespace curv4
