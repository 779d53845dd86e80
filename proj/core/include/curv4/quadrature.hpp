#pragma once

#include <vector>

namespace curv4 {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss–Legendre rule on [a, b].
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

// Pairwise summation: deterministic and with O(log n) error growth.
double pairwise_sum(const std::vector<double>& values);

}  // namespace curv4
