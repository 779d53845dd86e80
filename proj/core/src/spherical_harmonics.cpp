#include "curv4/spherical_harmonics.hpp"

#include <stdexcept>

namespace curv4 {

SphericalHarmonics::SphericalHarmonics(int max_degree) : max_degree_(max_degree) {
  if (max_degree < 0) throw std::invalid_argument("spherical harmonics: negative degree");
  // Legendre polynomials by Bonnet's recurrence, coefficients lowest power first.
  std::vector<std::vector<double>> leg(max_degree + 1);
  leg[0] = {1.0};
  if (max_degree >= 1) leg[1] = {0.0, 1.0};
  for (int l = 2; l <= max_degree; ++l) {
    leg[l].assign(l + 1, 0.0);
    for (int k = 0; k < l; ++k) leg[l][k + 1] += (2.0 * l - 1.0) / l * leg[l - 1][k];
    for (int k = 0; k + 1 < l; ++k) leg[l][k] -= (l - 1.0) / l * leg[l - 2][k];
  }
  coeffs_.resize(index(max_degree, max_degree) + 1);
  for (int l = 0; l <= max_degree; ++l) {
    std::vector<double> p = leg[l];
    for (int m = 0; m <= l; ++m) {
      if (m > 0) {
        std::vector<double> dp(p.size() > 1 ? p.size() - 1 : 1, 0.0);
        for (std::size_t k = 1; k < p.size(); ++k) dp[k - 1] = k * p[k];
        p = dp;
      }
      // Y_lm = N P_l^(m)(z) Re/Im (x+iy)^m,  N² = (2l+1)/(4π) (l-m)!/(l+m)!  (×2 for m > 0)
      double ratio = 1.0;
      for (int k = l - m + 1; k <= l + m; ++k) ratio /= k;
      double n2 = (2.0 * l + 1.0) / (4.0 * std::numbers::pi) * ratio;
      if (m > 0) n2 *= 2.0;
      const double n = std::sqrt(n2);
      std::vector<double> c = p;
      for (auto& x : c) x *= n;
      coeffs_[index(l, m)] = c;
    }
  }
}

}  // namespace curv4
