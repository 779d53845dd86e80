#pragma once

// Real spherical harmonics on the unit sphere as polynomials in the ambient
// coordinates (x, y, z), evaluated over any scalar type. Orthonormal for the
// round area measure.

#include <cmath>
#include <numbers>
#include <vector>

namespace curv4 {

class SphericalHarmonics {
 public:
  explicit SphericalHarmonics(int max_degree);

  int max_degree() const { return max_degree_; }
  // (L+1)² functions ordered by l, then m = -l..l.
  int count() const { return (max_degree_ + 1) * (max_degree_ + 1); }

  // Values of all Y_lm at (x, y, z) with x² + y² + z² = 1.
  template <typename T>
  std::vector<T> evaluate(const T& x, const T& y, const T& z) const {
    std::vector<T> out(count(), T(0.0));
    // (x + iy)^m
    std::vector<T> re(max_degree_ + 1, T(0.0)), im(max_degree_ + 1, T(0.0));
    re[0] = T(1.0);
    for (int m = 1; m <= max_degree_; ++m) {
      re[m] = re[m - 1] * x - im[m - 1] * y;
      im[m] = re[m - 1] * y + im[m - 1] * x;
    }
    for (int l = 0; l <= max_degree_; ++l) {
      for (int m = 0; m <= l; ++m) {
        const auto& c = coeffs_[index(l, m)];
        T p(0.0);
        for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k) p = p * z + c[k];
        if (m == 0) {
          out[l * l + l] = p;
        } else {
          out[l * l + l + m] = p * re[m];
          out[l * l + l - m] = p * im[m];
        }
      }
    }
    return out;
  }

 private:
  static int index(int l, int m) { return l * (l + 1) / 2 + m; }
  int max_degree_;
  // Normalized polynomial in z multiplying Re/Im (x+iy)^m, lowest power first.
  std::vector<std::vector<double>> coeffs_;
};

}  // namespace curv4
