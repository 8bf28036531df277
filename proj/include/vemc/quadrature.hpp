#pragma once

#include <vector>

#include "vemc/geometry.hpp"

namespace vemc {

/// Gauss rule on the reference segment [0,1].
struct EdgeRule {
  std::vector<double> points;
  std::vector<double> weights;  // sum to 1
  int degree = 0;               // polynomial exactness
};

/// edge_rule(d) returns the Gauss rule with ceil((d+1)/2) points,
/// exact for polynomials of degree d on [0,1].
EdgeRule edge_rule(int degree);

/// Quadrature rule in physical coordinates for one polygonal cell.
struct PolygonRule {
  std::vector<Vec2> points;
  std::vector<double> weights;  // sum to |K|
  int degree = 0;
  int fan_triangles = 0;

  double integrate(const std::vector<double>& values) const {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += weights[i] * values[i];
    return s;
  }
  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) s += weights[i] * f(points[i]);
    return s;
  }
};

/// Centroid-fan rule of the requested exactness degree. The fan uses signed
/// triangles, so it is exact on any simple polygon; an ear-clipping fallback
/// produces all-positive weights when the centroid does not see every edge.
PolygonRule polygon_rule(const std::vector<Vec2>& cell, int degree);

/// Scaled monomials m_a = ((x - x_K)/h_K)^p ((y - y_K)/h_K)^q ordered by
/// total degree: 1, xi, eta, xi^2, xi*eta, eta^2, ...
struct MonomialBasis {
  Vec2 center;
  double h = 1.0;
  static int size(int degree) { return (degree + 1) * (degree + 2) / 2; }
  // exponents of the a-th monomial (0-based index)
  static std::pair<int, int> exponents(int a);
  static int index(int p, int q) {
    const int d = p + q;
    return d * (d + 1) / 2 + q;
  }
  double eval(int a, const Vec2& x) const;
  Vec2 grad(int a, const Vec2& x) const;
};

/// Moments M_a = \int_K m_a dx for all scaled monomials up to max_degree.
/// M_0 = |K| and the degree-1 moments vanish (centroid-scaled basis).
struct MomentTable {
  MonomialBasis basis;
  std::vector<double> moments;
  int max_degree = 0;
  double area() const { return moments[0]; }
  /// \int_K m_a m_b dx (requires deg(a)+deg(b) <= max_degree)
  double product_moment(int a, int b) const;
};

MomentTable monomial_moments(const std::vector<Vec2>& cell, int max_degree);

}  // namespace vemc
