#pragma once

// Chart atlases and analytic metric fields for the model 4-manifolds.

#include "curv4/errors.hpp"
#include "curv4/metric_models.hpp"
#include "curv4/tensor_core.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace curv4 {

using Point4 = Vec4<double>;

struct Chart {
  int id = 0;
  std::string label;
  ChartDomain domain = ChartDomain::Box;
};

// Value, first and second coordinate derivatives of g at one point.
// dg[k](i,j) = ∂_k g_ij, ddg[l][k](i,j) = ∂_l ∂_k g_ij.
struct MetricJets {
  Matrix4 g;
  std::array<Matrix4, 4> dg;
  std::array<std::array<Matrix4, 4>, 4> ddg;
};

struct KaehlerStructure {
  // Complex structure J as a (1,1) tensor in chart coordinates.
  std::function<Matrix4(int chart, const Point4&)> complex_structure;
  // Per-chart Kähler potential Φ.
  std::function<double(int chart, const Point4&)> potential;
};

class MetricField {
 public:
  MetricField(std::string name, std::map<std::string, double> parameters, MetricModel model);

  const std::string& name() const { return name_; }
  const std::map<std::string, double>& parameters() const { return parameters_; }
  const std::vector<Chart>& atlas() const { return atlas_; }
  const MetricModel& model() const { return model_; }

  bool is_kaehler() const { return kaehler_.has_value(); }
  const std::optional<KaehlerStructure>& kaehler() const { return kaehler_; }

  // Metric components over any scalar type.
  template <typename T>
  Mat4<T> eval_t(int chart, const Vec4<T>& x) const {
    return std::visit([&](const auto& m) { return m.template metric<T>(chart, x); }, model_);
  }

  template <typename T>
  std::optional<Vec4<T>> transition_t(int from, int to, const Vec4<T>& x) const {
    return std::visit([&](const auto& m) { return m.template transition<T>(from, to, x); }, model_);
  }

  Matrix4 eval(int chart, const Point4& p) const;
  std::array<Matrix4, 4> deriv1(int chart, const Point4& p) const;
  std::array<std::array<Matrix4, 4>, 4> deriv2(int chart, const Point4& p) const;
  MetricJets jets(int chart, const Point4& p) const;

  std::optional<Point4> transition(int from, int to, const Point4& p) const;
  // Jacobian ∂y/∂x of the transition map at p (rows: target coordinates).
  std::optional<Matrix4> transition_jacobian(int from, int to, const Point4& p) const;

  void check_chart(int chart) const;

 private:
  std::string name_;
  std::map<std::string, double> parameters_;
  MetricModel model_;
  std::vector<Chart> atlas_;
  std::optional<KaehlerStructure> kaehler_;
};

MetricField flat_metric();
MetricField round_sphere4(double radius);
MetricField product_spheres(double a, double b);
MetricField ht_metric(double t);
MetricField twisted_metric(double t, double eps, const std::string& phi_id = "height-product");
MetricField fubini_study();

// Largest |ε| for which g_{t,ε} keeps its minimum eigenvalue over the
// 16⁴-per-chart validation grid above 10⁻³ of the ε = 0 value. Memoized.
double twisted_eps_max(double t, const std::string& phi_id = "height-product");

struct QuadratureSpec {
  int radial = 24;
  int angular = 32;
};

// Riemannian volume ∫√det g over the chart partition of the atlas.
double volume(const MetricField& m, const QuadratureSpec& quad = {});

struct KaehlerResiduals {
  double j_squared = 0.0;     // max ‖J² + Id‖
  double compatibility = 0.0; // max ‖g(J·,J·) − g‖
  double parallel = 0.0;      // max ‖∇J‖
};

struct SamplePoint {
  int chart = 0;
  Point4 x{};
};

KaehlerResiduals kaehler_residuals(const MetricField& m, const std::vector<SamplePoint>& grid);

// Deterministic n⁴ lattice on [-1,1]⁴ in every chart.
std::vector<SamplePoint> lattice_grid(const MetricField& m, int n);
// Uniform random points with |coordinate| ≤ 1 in random charts.
std::vector<SamplePoint> random_points(const MetricField& m, int count, unsigned seed);

// Parses `name(key=value,...)`, e.g. `twisted(t=0.5,eps=0.01,phi=height-product)`.
MetricField parse_metric_spec(const std::string& spec);

// Covariant derivative ∇_k J^i_j in coordinates at p.
std::array<Matrix4, 4> covariant_derivative_of_j(const MetricField& m, int chart, const Point4& p);

}  // namespace curv4
