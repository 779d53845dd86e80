#pragma once

// Galerkin discretization of normal sections over a minimal 2-sphere: the
// polarized second-variation form, its spectrum relative to the L² mass
// matrix, Morse index and nullity, near-holomorphic sections and the
// instability diagnostic for slices of S²×S².

#include "curv4/surface_lab.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace curv4 {

// Spherical harmonics Y_lm (l ≤ L) times the surface's normal generators.
class SectionBasis {
 public:
  SectionBasis(const SurfaceImmersion& s, int max_degree);

  int max_degree() const { return max_degree_; }
  int size() const { return size_; }
  const SurfaceImmersion& surface() const { return surface_; }

  // Features (a₃, a₄, ∇⊥_{e₁}σ, ∇⊥_{e₂}σ) of every basis element at a node;
  // column k belongs to basis element k.
  Eigen::Matrix<double, 6, Eigen::Dynamic> features(const SurfacePointData& p) const;

  NormalSection section(const Eigen::VectorXd& coeffs) const;

 private:
  SurfaceImmersion surface_;
  int max_degree_;
  int size_;
};

struct IndexForm {
  Eigen::MatrixXd q;            // δ(ζ_a, ζ_b)
  Eigen::MatrixXd g;            // ∫⟨ζ_a, ζ_b⟩
  Eigen::MatrixXd dbar;         // ∫2⟨∂̄⊥ζ_a, ∂̄⊥ζ_b⟩
  Eigen::VectorXd spectrum;     // eigenvalues of Q x = λ G x on the range of G, ascending
  Eigen::MatrixXd eigenvectors; // basis coefficients, G-orthonormal columns
  int morse_index = 0;
  int nullity = 0;
  double tol_idx = 0.0;
  double q_norm = 0.0;          // max |λ|
  double g_condition = 0.0;     // on the retained range
  int rank = 0;
  double symmetry_residual = 0.0;
};

struct IndexOptions {
  VariationOptions variation;
  double range_tolerance = 1e-6;  // eigenvalues of G below this fraction of the largest are dropped
  bool require_minimal = true;
  int threads = 1;
};

IndexForm assemble_index_form(const std::vector<SurfacePointData>& nodes, const SectionBasis& basis,
                              const IndexOptions& opt = {});

// Polarized second variation δ(σ₁, σ₂) evaluated directly at the nodes.
double second_variation_bilinear(const std::vector<SurfacePointData>& nodes, const NormalSection& a,
                                 const NormalSection& b, const VariationOptions& opt = {});

struct NearHolomorphic {
  Eigen::VectorXd coeffs;
  double energy = 0.0;  // ∫2‖∂̄⊥σ‖² with ∫‖σ‖² = 1
  NormalSection sigma;
  double chern_number = 0.0;
  bool negative_chern = false;  // search still ran
};

NearHolomorphic near_holomorphic_section(const std::vector<SurfacePointData>& nodes, const SectionBasis& basis,
                                         int threads = 1);
// Same, reusing assembled matrices.
NearHolomorphic near_holomorphic_section(const IndexForm& form, const std::vector<SurfacePointData>& nodes,
                                         const SectionBasis& basis);

struct RefinementStep {
  int degree = 0;
  int morse_index = 0;
  int nullity = 0;
};

struct RefinementResult {
  int morse_index = 0;
  int nullity = 0;
  int degree_used = 0;
  std::vector<RefinementStep> history;
};

// Raises L by 2 from l0 until (index, nullity) repeat at consecutive degrees.
RefinementResult refine_until_stable(const std::function<IndexForm(int)>& index_at, int l0, int l_max);

struct TheoremCReport {
  bool refused = false;          // slice not minimal
  double minimality_residual = 0.0;
  double chern_number = 0.0;
  double area = 0.0;
  double energy = 0.0;           // near-holomorphic ∂̄ energy
  double delta2_sigma = 0.0;
  double delta2_j_sigma = 0.0;
  double sum = 0.0;
  double dbar_term = 0.0;
  double pairing_term = 0.0;
  double a_wedge_a_term = 0.0;
  double identity_residual = 0.0;
  double min_pairing = 0.0;      // min over nodes of ⟨(s/6 − W₊)η, η⟩
  double max_a_wedge_a = 0.0;
  double min_sectional = 0.0;    // ambient, sampled along the surface
  bool hypothesis_pairing = false;
  bool hypothesis_geodesic = false;
  bool hypothesis_positive_k = false;
  std::string verdict;
};

TheoremCReport theorem_c_harness(const MetricField& m, const SurfaceImmersion& slice, int max_degree,
                                 const SurfaceQuadrature& quad = {}, int threads = 1);

// Instability branch on the product slice with the ambient curvature term
// replaced by a constant κ > 0.
struct SyntheticFixtureReport {
  double kappa = 0.0;
  double area = 0.0;
  double delta2_parallel = 0.0;    // expected −2κ·Area
  double delta2_plus = 0.0;        // δ²(σ + Jσ)
  double delta2_minus = 0.0;       // δ²(σ − Jσ)
  double pair_sum = 0.0;           // δ²(σ) + δ²(Jσ)
  int pair_index = 0;              // negative directions in span{σ, σ±Jσ}
  int morse_index = 0;             // of the full discretized form
};

SyntheticFixtureReport synthetic_theorem_c_fixture(double kappa, int max_degree,
                                                   const SurfaceQuadrature& quad = {}, int threads = 1);

}  // namespace curv4
