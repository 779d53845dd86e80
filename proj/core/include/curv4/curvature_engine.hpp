#pragma once

// Pointwise curvature of a MetricField: Christoffel symbols, the Riemann
// tensor in a positively oriented orthonormal frame, its Λ² block form with
// W±, positivity conditions, sectional-curvature minimization and the
// Weitzenböck identity on 2-forms.

#include "curv4/dual.hpp"
#include "curv4/metric_library.hpp"
#include "curv4/tensor_core.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace curv4 {

struct Christoffel {
  // upper[k](i, j) = Γ^k_ij
  std::array<Matrix4, 4> upper;
  // M(i, l) = Γ^i_{k l}: the connection matrix in direction ∂_k.
  Matrix4 of_direction(int k) const;
  // Γ(X, Y)^k = Γ^k_ij X^i Y^j
  Vector4 contract(const Vector4& x, const Vector4& y) const;
};

Christoffel christoffel_from_jets(const MetricJets& j);
Christoffel christoffel(const MetricField& m, int chart, const Point4& p);

struct CurvatureFrameData {
  int chart = 0;
  Point4 point{};
  Matrix4 metric;        // g(p) in coordinates
  Matrix4 frame;         // columns e_a, positively oriented, g-orthonormal
  CurvatureLike riemann; // pair basis, riemann(ab, cd) = ⟨R(e_a,e_b)e_d, e_c⟩
  double s = 0.0;
  SymBilinear4 ric;
  SymBilinear4 ric_traceless;
  Matrix6 r_op;          // curvature operator in the orthonormal (η, η̄)/√2 basis
  Matrix3 w_plus;
  Matrix3 w_minus;
  Matrix3 ric_block;     // upper-right block of r_op
};

// Coordinate Riemann tensor Rc(a,b,c,d) = ⟨R(∂_a,∂_b)∂_d, ∂_c⟩ (pair basis).
CurvatureLike coordinate_riemann(const MetricJets& j);

// Assembles all frame quantities. When `frame` is given it must be a
// positively oriented g-orthonormal frame (columns); otherwise the Cholesky
// frame of g is used.
CurvatureFrameData curvature_from_jets(const MetricJets& j, int chart, const Point4& p,
                                       const std::optional<Matrix4>& frame = std::nullopt);

CurvatureFrameData riemann_at(const MetricField& m, int chart, const Point4& p,
                              const std::optional<Matrix4>& frame = std::nullopt);

// Orthonormal, positively oriented frame (columns) from the Cholesky factor of g.
Matrix4 cholesky_frame(const Matrix4& g);

struct DecompositionCoefficients {
  double scalar;  // multiplies s · g⊘g
  double ricci;   // multiplies R̂ic⊘g
};

// Coefficients fixed by requiring the remainder W to be totally trace-free
// on algebraic probe tensors; computed once.
const DecompositionCoefficients& decomposition_coefficients();

struct Decomposition {
  double s = 0.0;
  SymBilinear4 ric_traceless;
  CurvatureLike weyl;  // pair basis
  double reconstruction_residual = 0.0;
};

Decomposition decompose(const CurvatureFrameData& c);

struct WeylBlocks {
  Matrix3 w_plus;
  Matrix3 w_minus;
  Matrix3 ric_block;
};

WeylBlocks weyl_blocks(const CurvatureFrameData& c);

// ‖r_op − [[s/12 + W₊, B], [Bᵗ, s/12 + W₋]]‖ with B taken from R̂ic⊘g.
double block_identity_residual(const CurvatureFrameData& c);

Vector3 sorted_eigenvalues(const Matrix3& m);

struct SectionalMinimum {
  double value = 0.0;
  Vector4 x;  // orthonormal frame components spanning the argmin plane
  Vector4 y;
  Bivector6 plane;
};

struct SectionalOptions {
  int starts = 64;
  double step_tolerance = 1e-10;
  int max_iterations = 400;
  unsigned seed = 0x5eed;
  bool enabled = true;  // false: skip the minimizer (min_sectional reported as NaN)
};

// Minimum of ⟨R ξ, ξ⟩ over unit decomposable ξ.
SectionalMinimum min_sectional_curvature(const CurvatureLike& riemann, const SectionalOptions& opt = {});
SectionalMinimum min_sectional_curvature(const CurvatureFrameData& c, const SectionalOptions& opt = {});
double max_sectional_curvature(const CurvatureFrameData& c, const SectionalOptions& opt = {});

inline double tol_psd(double s) { return 1e-9 * (1.0 + std::abs(s) / 12.0); }

struct Lemma21Record {
  double antecedent_margin = 0.0;  // min eig(s/12 + W)
  double consequent_margin = 0.0;  // min eig(s/6 − W)
  bool antecedent = false;
  bool consequent = false;
  bool violation = false;          // antecedent holds but consequent fails
};

Lemma21Record lemma21_check(double s, const Matrix3& w, double tol);
struct Lemma21Pair {
  Lemma21Record plus;
  Lemma21Record minus;
};
Lemma21Pair lemma21_check(const CurvatureFrameData& c);

// J expressed in the frame of c.
Matrix4 frame_complex_structure(const CurvatureFrameData& c, const Matrix4& j_coord);

// K^h(X, Y) = R(X, JX, Y, JY) with X, Y, J in frame components.
double holomorphic_bisectional(const CurvatureFrameData& c, const Matrix4& j_frame, const Vector4& x,
                               const Vector4& y);
// Full curvature evaluation R(a,b,c,d) on frame vectors.
double curvature4(const CurvatureLike& r, const Vector4& a, const Vector4& b, const Vector4& c,
                  const Vector4& d);

struct PointMargins {
  int chart = 0;
  Point4 x{};
  double s = 0.0;
  double min_sectional = 0.0;
  double s6_minus_wplus = 0.0;
  double s6_minus_wminus = 0.0;
  double s12_plus_wplus = 0.0;
  double s12_plus_wminus = 0.0;
  double r_op = 0.0;
  double trace_residual = 0.0;
  double block_residual = 0.0;
  double bianchi_residual = 0.0;
};

PointMargins point_margins(const MetricField& m, int chart, const Point4& p,
                           const SectionalOptions& opt = {});

struct Margin {
  double value = std::numeric_limits<double>::infinity();
  bool holds = true;
  SamplePoint worst{};
};

struct ConditionReport {
  Margin min_sectional;
  Margin s6_minus_wplus;
  Margin s6_minus_wminus;
  Margin s12_plus_wplus;
  Margin s12_plus_wminus;
  Margin r_op;
  double min_s = std::numeric_limits<double>::infinity();
  double max_s = -std::numeric_limits<double>::infinity();
  double max_trace_residual = 0.0;
  double max_block_residual = 0.0;
  double max_bianchi_residual = 0.0;
  std::size_t points = 0;
};

// Evaluates every grid point (optionally on several threads) and reduces by
// minimum; the result is independent of the thread count.
ConditionReport condition_check(const MetricField& m, const std::vector<SamplePoint>& grid,
                                int threads = 1, std::vector<PointMargins>* records = nullptr,
                                const SectionalOptions& opt = {});

// Aggregation used by condition_check; exposed so reports can be recomputed
// from per-point records.
ConditionReport aggregate_margins(const std::vector<PointMargins>& records);

// Analytic 2-form: coordinate components α_ij (i<j, pair order) as second
// order jets.
using TwoFormField = std::function<std::array<D2, 6>(int chart, const Vec4<D2>& x)>;

TwoFormField kaehler_form_field(const MetricField& m);

// α_ij = amplitude_ij · sin(k_ij · x + phase_ij): a generic smooth test form.
struct TrigTwoForm {
  std::array<double, 6> amplitude{};
  std::array<Vector4, 6> wavevector{};
  std::array<double, 6> phase{};
};
TwoFormField trigonometric_two_form(const TrigTwoForm& f);
// Coefficients drawn uniformly from a seeded generator.
TrigTwoForm random_trig_two_form(unsigned seed);

struct WeitzenboeckTerms {
  Bivector6 hodge_laplacian;  // (dδ + δd)α in the frame
  Bivector6 rough_laplacian;  // ∇*∇α in the frame
  Bivector6 weyl_term;        // W(α) in the frame
  Bivector6 alpha;            // α in the frame
  double s = 0.0;
  double residual = 0.0;      // ‖Δα − (∇*∇α − 2Wα + (s/3)α)‖
};

WeitzenboeckTerms weitzenboeck_residual(const MetricField& m, const TwoFormField& alpha, int chart,
                                        const Point4& p);

}  // namespace curv4
