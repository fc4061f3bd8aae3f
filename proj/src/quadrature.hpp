#pragma once

#include <array>
#include <cmath>

namespace gsmhd {

/// Area-normalized triangle rule: barycentric points with weights summing
/// to 1, exact for polynomials up to the stated degree.
struct TriQuadrature {
  static constexpr int kNumPoints = 6;
  static constexpr int kDegree = 4;
  std::array<std::array<double, 3>, kNumPoints> bary;
  std::array<double, kNumPoints> weight;
};

/// Dunavant degree-4 six-point rule.
inline const TriQuadrature &tri_quadrature() {
  static const TriQuadrature q = [] {
    TriQuadrature t{};
    const double w1 = 0.223381589678011, b1 = 0.445948490915965;
    const double w2 = 0.109951743655322, b2 = 0.091576213509771;
    const double sets[2][2] = {{w1, b1}, {w2, b2}};
    int n = 0;
    for (auto [w, b] : sets) {
      double a = 1.0 - 2.0 * b;
      t.bary[n] = {a, b, b};
      t.weight[n++] = w;
      t.bary[n] = {b, a, b};
      t.weight[n++] = w;
      t.bary[n] = {b, b, a};
      t.weight[n++] = w;
    }
    return t;
  }();
  return q;
}

/// Gauss-Legendre rule on [0,1], exact to degree 5.
struct EdgeQuadrature {
  static constexpr int kNumPoints = 3;
  std::array<double, kNumPoints> x;
  std::array<double, kNumPoints> weight;
};

inline const EdgeQuadrature &edge_quadrature() {
  static const EdgeQuadrature q = [] {
    EdgeQuadrature e{};
    const double s = std::sqrt(15.0) / 10.0;
    e.x = {0.5 - s, 0.5, 0.5 + s};
    e.weight = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    return e;
  }();
  return q;
}

}  // namespace gsmhd
