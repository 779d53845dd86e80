#pragma once

// Multivariate forward-mode dual numbers. Nesting Dual<Dual<double, N>, N>
// yields exact second derivatives; deeper nesting yields higher orders.

#include <array>
#include <cmath>
#include <cstddef>
#include <type_traits>

namespace curv4 {

template <typename T, std::size_t N>
struct Dual {
  T v{};
  std::array<T, N> d{};

  constexpr Dual() = default;
  constexpr Dual(double x) : v(x) {}  // NOLINT: implicit lift of constants
  constexpr Dual(const T& x, const std::array<T, N>& g) : v(x), d(g) {}

  template <typename U = T, typename = std::enable_if_t<!std::is_same_v<U, double>>>
  constexpr Dual(const T& x) : v(x) {}  // NOLINT

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (std::size_t i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (std::size_t i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (std::size_t i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const T inv = T(1.0) / o.v;
    const T q = v * inv;
    for (std::size_t i = 0; i < N; ++i) d[i] = (d[i] - q * o.d[i]) * inv;
    v = q;
    return *this;
  }
  Dual& operator*=(double s) {
    v *= s;
    for (auto& x : d) x *= s;
    return *this;
  }
};

template <typename T>
struct is_dual : std::false_type {};
template <typename T, std::size_t N>
struct is_dual<Dual<T, N>> : std::true_type {};

template <typename T, std::size_t N>
Dual<T, N> operator-(Dual<T, N> a) {
  a.v = -a.v;
  for (auto& x : a.d) x = -x;
  return a;
}

template <typename T, std::size_t N>
Dual<T, N> operator+(Dual<T, N> a, const Dual<T, N>& b) { return a += b; }
template <typename T, std::size_t N>
Dual<T, N> operator-(Dual<T, N> a, const Dual<T, N>& b) { return a -= b; }
template <typename T, std::size_t N>
Dual<T, N> operator*(Dual<T, N> a, const Dual<T, N>& b) { return a *= b; }
template <typename T, std::size_t N>
Dual<T, N> operator/(Dual<T, N> a, const Dual<T, N>& b) { return a /= b; }

template <typename T, std::size_t N>
Dual<T, N> operator+(Dual<T, N> a, double b) { a.v += b; return a; }
template <typename T, std::size_t N>
Dual<T, N> operator+(double b, Dual<T, N> a) { a.v += b; return a; }
template <typename T, std::size_t N>
Dual<T, N> operator-(Dual<T, N> a, double b) { a.v -= b; return a; }
template <typename T, std::size_t N>
Dual<T, N> operator-(double b, const Dual<T, N>& a) { return (-a) + b; }
template <typename T, std::size_t N>
Dual<T, N> operator*(Dual<T, N> a, double b) { return a *= b; }
template <typename T, std::size_t N>
Dual<T, N> operator*(double b, Dual<T, N> a) { return a *= b; }
template <typename T, std::size_t N>
Dual<T, N> operator/(Dual<T, N> a, double b) { return a *= (1.0 / b); }
template <typename T, std::size_t N>
Dual<T, N> operator/(double b, const Dual<T, N>& a) { return Dual<T, N>(b) / a; }

// Chain rule helper: f(a) given f(a.v) and f'(a.v).
template <typename T, std::size_t N>
Dual<T, N> chain(const Dual<T, N>& a, const T& f, const T& df) {
  Dual<T, N> r;
  r.v = f;
  for (std::size_t i = 0; i < N; ++i) r.d[i] = df * a.d[i];
  return r;
}

using std::cos;
using std::exp;
using std::log;
using std::sin;
using std::sqrt;

template <typename T, std::size_t N>
Dual<T, N> sqrt(const Dual<T, N>& a) {
  const T s = sqrt(a.v);
  return chain(a, s, T(0.5) / s);
}
template <typename T, std::size_t N>
Dual<T, N> log(const Dual<T, N>& a) {
  return chain(a, log(a.v), T(1.0) / a.v);
}
template <typename T, std::size_t N>
Dual<T, N> exp(const Dual<T, N>& a) {
  const T e = exp(a.v);
  return chain(a, e, e);
}
template <typename T, std::size_t N>
Dual<T, N> sin(const Dual<T, N>& a) {
  return chain(a, sin(a.v), cos(a.v));
}
template <typename T, std::size_t N>
Dual<T, N> cos(const Dual<T, N>& a) {
  return chain(a, cos(a.v), -sin(a.v));
}

inline double value(double x) { return x; }
template <typename T, std::size_t N>
double value(const Dual<T, N>& a) {
  return value(a.v);
}

// Scalars with exact first / second derivatives in four coordinates.
using D1 = Dual<double, 4>;
using D2 = Dual<D1, 4>;

// Seeds x_i as independent variables at point p.
inline std::array<D1, 4> seed1(const std::array<double, 4>& p) {
  std::array<D1, 4> x{};
  for (std::size_t i = 0; i < 4; ++i) {
    x[i].v = p[i];
    x[i].d[i] = 1.0;
  }
  return x;
}

inline std::array<D2, 4> seed2(const std::array<double, 4>& p) {
  std::array<D2, 4> x{};
  for (std::size_t i = 0; i < 4; ++i) {
    x[i].v.v = p[i];
    x[i].v.d[i] = 1.0;
    x[i].d[i].v = 1.0;
  }
  return x;
}

// Lifts a value of order-k jet T into independent directions of Dual<T,N>
// where the outer derivatives are seeded from the inner ones. Used to add
// one more derivative level on top of existing jets.
template <typename T, std::size_t N>
std::array<Dual<T, N>, N> seed_outer(const std::array<T, N>& x) {
  std::array<Dual<T, N>, N> r{};
  for (std::size_t i = 0; i < N; ++i) {
    r[i].v = x[i];
    r[i].d[i] = T(1.0);
  }
  return r;
}

}  // namespace curv4
