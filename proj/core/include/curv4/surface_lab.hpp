#pragma once

// Immersed 2-spheres in a 4-manifold: induced metric, adapted frames, second
// fundamental form, normal connection and curvature, the ∂̄⊥ operator and the
// pointwise second-variation integrands, integrated over a two-chart
// stereographic atlas of S².

#include "curv4/curvature_engine.hpp"
#include "curv4/dual.hpp"
#include "curv4/metric_library.hpp"

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace curv4 {

// Jets in the two surface coordinates (u, v).
using S1 = Dual<double, 2>;
using S2 = Dual<S1, 2>;
using S3 = Dual<S2, 2>;

using Matrix2 = Eigen::Matrix2d;
using Vector2 = Eigen::Vector2d;
using Frame4x2 = Eigen::Matrix<double, 4, 2>;

// Unit-sphere point for stereographic chart 0 (ζ = u+iv, |ζ| ≤ 1 covers
// z ≤ 0) and chart 1 (ζ' = 1/ζ).
template <typename T>
std::array<T, 3> sphere_point(int chart, const T& u, const T& v) {
  const T r2 = u * u + v * v;
  const T inv = 1.0 / (1.0 + r2);
  if (chart == 0) return {2.0 * u * inv, 2.0 * v * inv, (r2 - 1.0) * inv};
  return {2.0 * u * inv, -2.0 * v * inv, (1.0 - r2) * inv};
}

struct SpherePoint {
  int chart;
  double u;
  double v;
};
// Chart whose unit disk contains the point, with its coordinates.
SpherePoint sphere_chart_of(double x, double y, double z);

enum class SurfaceKind { Slice, PerturbedSlice, Equator, ComplexLine };

class SurfaceImmersion {
 public:
  SurfaceImmersion(SurfaceKind kind, std::string name, std::map<std::string, double> parameters);

  SurfaceKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const std::map<std::string, double>& parameters() const { return parameters_; }

  int ambient_chart(int chart) const { return ambient_chart_[chart]; }
  // Coordinate directions used to seed the Gram–Schmidt normal frame.
  std::array<int, 2> normal_seeds() const { return normal_seeds_; }
  // The ambient manifold family this immersion lives in.
  bool compatible_with(const MetricField& m) const;

  template <typename T>
  Vec4<T> map(int chart, const T& u, const T& v) const;

  // Globally smooth ambient vector fields along the surface whose normal
  // projections span the normal bundle (coordinates of ambient_chart(chart)).
  template <typename T>
  std::vector<Vec4<T>> generators(int chart, const T& u, const T& v) const;
  int generator_count() const { return kind_ == SurfaceKind::ComplexLine ? 4 : 2; }

 private:
  SurfaceKind kind_;
  std::string name_;
  std::map<std::string, double> parameters_;
  std::array<int, 2> ambient_chart_{};
  std::array<int, 2> normal_seeds_{};
  int factor_ = 1;
  double qx_ = 0.0, qy_ = 0.0, delta_ = 0.0;
};

SurfaceImmersion product_slice(int factor = 1, double qx = 0.0, double qy = 0.0);
// Graphical perturbation of a factor-1 slice; minimal only when delta = 0.
SurfaceImmersion perturbed_slice(double delta = 0.2, double qx = 0.0, double qy = 0.0);
SurfaceImmersion equator_s4();
SurfaceImmersion complex_line();

// Grammar: `slice(factor=1,point=(0,0))`, `perturbed-slice(delta=0.2)`,
// `equator4`, `cp1-line`.
SurfaceImmersion parse_surface_spec(const std::string& spec);

// Ambient vector field along the surface (ambient coordinates of the chart's
// target), as second-order jets in (u, v). Only its normal part is used.
struct NormalSection {
  std::function<Vec4<S2>(int chart, const S2& u, const S2& v)> field;
};

struct AdaptedFrame {
  Matrix4 e;               // columns e₁..e₄ in ambient coordinates
  Matrix2 tangent_coeffs;  // e_i = Σ_a c(a, i) ∂_a  (a = u, v)
};

struct InducedGeometry {
  int chart = 0;
  double u = 0.0, v = 0.0;
  int ambient_chart = 0;
  Point4 x{};
  Frame4x2 differential;
  Matrix2 first_form;
  double area_element = 0.0;
  AdaptedFrame frame;
};

struct SecondFundamentalForm {
  // a[α](i, j) = ⟨A(e_i, e_j), e_{3+α}⟩
  std::array<Matrix2, 2> a;
  Vector2 mean_curvature;  // tr A in the normal frame
  double shape_norm3 = 0.0;  // ‖A^{e₃}‖²
  double shape_norm4 = 0.0;  // ‖A^{e₄}‖²
  double minimality_residual = 0.0;
};

// All pointwise data needed by integrals, computed once per node.
struct SurfacePointData {
  InducedGeometry geom;
  SecondFundamentalForm sff;
  Vector2 omega;                // ⟨∇_{e_i} e₃, e₄⟩
  double k_perp_intrinsic = 0.0;
  double k_perp_extrinsic = 0.0;
  CurvatureFrameData curvature; // ambient curvature in the adapted frame
  // Jets for section evaluation.
  std::array<Vec4<S2>, 2> normal_jets;
  Mat4<S2> metric_jets;
  std::array<std::array<S1, 2>, 2> first_form_jets;
  double weight = 0.0;          // quadrature weight including the area element
};

InducedGeometry induced_geometry(const SurfaceImmersion& s, const MetricField& m, int chart, double u,
                                 double v);
SurfacePointData surface_point(const SurfaceImmersion& s, const MetricField& m, int chart, double u,
                               double v);
SecondFundamentalForm second_fundamental(const SurfaceImmersion& s, const MetricField& m, int chart,
                                         double u, double v);
double k_perp_intrinsic(const SurfaceImmersion& s, const MetricField& m, int chart, double u, double v);
double k_perp_extrinsic(const SurfaceImmersion& s, const MetricField& m, int chart, double u, double v);
double k_perp_extrinsic(const SecondFundamentalForm& a, const CurvatureLike& r);

// Section coefficients in the normal frame and their covariant derivatives.
struct SectionJet {
  Vector2 a;       // (a₃, a₄)
  Matrix2 da;      // da(α, i) = e_i(a_α)
  Matrix2 nabla;   // nabla(α, i) = ⟨∇⊥_{e_i} σ, e_{3+α}⟩
  S2 a3, a4;       // second-order jets in (u, v)
};

SectionJet section_jet(const SurfacePointData& p, const NormalSection& sigma);
// Same for an ambient field already evaluated at the node.
SectionJet section_jet_from_field(const SurfacePointData& p, const Vec4<S2>& field);
SectionJet section_jet_from_coefficients(const SurfacePointData& p, const S2& a3, const S2& a4);
// ⟨V, e₃⟩ and ⟨V, e₄⟩ as jets.
std::array<S2, 2> normal_components(const SurfacePointData& p, const Vec4<S2>& field);
// Jets of the surface coordinates at the node.
std::array<S2, 2> coordinate_jets(const SurfacePointData& p);
SectionJet rotate(const SectionJet& j);  // Jσ: (a₃, a₄) ↦ (−a₄, a₃)

// ∇⊥_X σ for X = Σ x_i e_i, in the normal frame.
Vector2 normal_connection(const SurfaceImmersion& s, const MetricField& m, const NormalSection& sigma,
                          const Vector2& x, int chart, double u, double v);

// ½‖∇⊥_e σ + ∇⊥_{Ie}(Jσ)‖² with e = cos θ e₁ + sin θ e₂.
double dbar_perp_sq(const SectionJet& j, double theta = 0.0);
double dbar_perp_sq(const SurfaceImmersion& s, const MetricField& m, const NormalSection& sigma, int chart,
                    double u, double v, double theta = 0.0);

// ‖A^{e₃}(e₁) − A^{e₄}(e₂)‖² + ‖A^{e₃}(e₂) + A^{e₄}(e₁)‖², the combination
// that pairs with K⊥ = R(e₁,e₂,e₃,e₄) + ⟨A^{e₃}e₁, A^{e₄}e₂⟩ − ⟨A^{e₄}e₁, A^{e₃}e₂⟩.
// Vanishes on complex curves of Kähler surfaces.
double a_wedge_a_sq(const SecondFundamentalForm& a);
double a_wedge_a_sq_expanded(const SecondFundamentalForm& a);

// ⟨(s/6 − W₊)η, η⟩ with η = e₁∧e₂ + e₃∧e₄ in the adapted frame, and its
// expression −2R(e₁,e₂,e₃,e₄) + Ric⊥(e₃) + Ric⊥(e₄).
double self_dual_pairing(const CurvatureFrameData& c);
double self_dual_pairing_normal(const CurvatureFrameData& c);

struct SurfaceQuadrature {
  int polar = 48;
  int azimuthal = 96;
};

struct VariationOptions {
  // Replaces Σ_k R(e_k, σ, e_k, σ) by κ (Σ_k |σ|²) = 2κ|σ|².
  std::optional<double> curvature_override;
};

// Quadrature nodes with pointwise data (parallel evaluation, fixed order).
std::vector<SurfacePointData> sample_surface(const SurfaceImmersion& s, const MetricField& m,
                                             const SurfaceQuadrature& quad = {}, int threads = 1);

double area(const std::vector<SurfacePointData>& nodes);
double chern_number(const std::vector<SurfacePointData>& nodes);
double chern_number(const SurfaceImmersion& s, const MetricField& m, const SurfaceQuadrature& quad = {});
double max_minimality_residual(const std::vector<SurfacePointData>& nodes);

// Integrands as functions of a section jet at a node.
double second_variation_density(const SurfacePointData& p, const SectionJet& j,
                                const VariationOptions& opt = {});
double averaged_variation_density(const SurfacePointData& p, const SectionJet& j);

// δ²(σ); throws GeometryError on a non-minimal surface.
double second_variation(const std::vector<SurfacePointData>& nodes, const NormalSection& sigma,
                        const VariationOptions& opt = {});
double second_variation(const SurfaceImmersion& s, const MetricField& m, const NormalSection& sigma,
                        const SurfaceQuadrature& quad = {});

struct IdentityResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};

// ∫‖∇⊥σ‖² against ∫{2‖∂̄⊥σ‖² + K⊥‖σ‖²}.
IdentityResult variational_identity_31x(const std::vector<SurfacePointData>& nodes, const NormalSection& sigma);

struct WeitzenboeckVariation {
  double lhs = 0.0;              // δ²(σ) + δ²(Jσ)
  double rhs = 0.0;
  double dbar_term = 0.0;        // ∫4‖∂̄⊥σ‖²
  double pairing_term = 0.0;     // ∫⟨(s/6 − W₊)η, η⟩‖σ‖²
  double a_wedge_a_term = 0.0;   // ∫‖A∧A‖²‖σ‖²
  double residual = 0.0;
};

// Checks minimality unless `identity_only` (then the quadratic forms are
// evaluated without the guard, for non-minimal test immersions).
WeitzenboeckVariation weitzenboeck_variation(const std::vector<SurfacePointData>& nodes,
                                             const NormalSection& sigma, bool identity_only = false);

// max |K⊥ + ½ Δ_S log‖σ‖²| over the nodes for a holomorphic non-vanishing σ.
struct LogNormCheck {
  double residual = 0.0;
  double max_dbar = 0.0;
  double min_norm = 0.0;
};
LogNormCheck log_norm_check(const std::vector<SurfacePointData>& nodes, const NormalSection& sigma,
                            bool enforce_preconditions = true);

// Unit section obtained by normalizing generator k (parallel on the built-in
// slices and on the equator).
NormalSection generator_section(const SurfaceImmersion& s, const MetricField& m, int k, bool normalize);
// Σ_n c_n Y_n(P) V_{j_n}: coefficients indexed by (harmonic, generator).
NormalSection harmonic_section(const SurfaceImmersion& s, int max_degree, const std::vector<double>& coeffs);
// Number of coefficients harmonic_section expects.
int harmonic_section_size(const SurfaceImmersion& s, int max_degree);

}  // namespace curv4
