#pragma once

// The identity suite behind `verify-identities`: every check produces one
// row with its worst residual over the sampled points or sections.

#include "reports.hpp"

#include <string>
#include <vector>

namespace curv4::cli {

struct IdentityRow {
  std::string identity;
  std::string subject;  // metric or surface
  double residual = 0.0;
  double tolerance = 0.0;
  int samples = 0;
  bool pass = true;
};

std::vector<IdentityRow> run_identity_suite(const RunConfig& cfg);

// Random s and traceless W with the implication s/12 + W ⪰ 0 ⇒ s/6 − W ⪰ 0
// checked on each draw.
struct ImplicationSweep {
  int samples = 0;
  int antecedent_holds = 0;
  int counterexamples = 0;
  double worst_margin = 0.0;  // min consequent margin where the antecedent holds
};
ImplicationSweep self_dual_implication_sweep(int count, unsigned seed);

// Degree-3 harmonic section with normally distributed coefficients.
NormalSection random_section(const SurfaceImmersion& s, unsigned seed);

}  // namespace curv4::cli
