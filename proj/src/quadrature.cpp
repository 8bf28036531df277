#include "vemc/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace vemc {

namespace {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      if (n == 1) p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    x[i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

}  // namespace

EdgeRule edge_rule(int degree) {
  if (degree < 0) throw std::invalid_argument("edge_rule: negative degree");
  const int n = (degree + 2) / 2;  // ceil((degree+1)/2)
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  EdgeRule r;
  r.degree = 2 * n - 1;
  r.points.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    r.points[i] = 0.5 * (x[i] + 1.0);
    r.weights[i] = 0.5 * w[i];
  }
  return r;
}

namespace {

// Tensor Gauss rule on the reference triangle (0,0)-(1,0)-(0,1) through the
// Duffy map x=u, y=v(1-u); exact for polynomials of total degree <= d.
void duffy_triangle_rule(int d, std::vector<Vec2>& pts, std::vector<double>& wts) {
  const int nu = (d + 3) / 2;  // integrand degree in u is d+1
  const int nv = (d + 2) / 2;
  std::vector<double> xu, wu, xv, wv;
  gauss_legendre(std::max(nu, 1), xu, wu);
  gauss_legendre(std::max(nv, 1), xv, wv);
  pts.clear();
  wts.clear();
  for (std::size_t i = 0; i < xu.size(); ++i) {
    const double u = 0.5 * (xu[i] + 1.0);
    for (std::size_t j = 0; j < xv.size(); ++j) {
      const double v = 0.5 * (xv[j] + 1.0);
      pts.emplace_back(u, v * (1.0 - u));
      wts.push_back(0.25 * wu[i] * wv[j] * (1.0 - u));
    }
  }
}

void append_triangle(PolygonRule& rule, const Vec2& a, const Vec2& b,
                     const Vec2& c, const std::vector<Vec2>& ref_pts,
                     const std::vector<double>& ref_wts) {
  const Vec2 e1 = b - a, e2 = c - a;
  const double jac = e1.x() * e2.y() - e1.y() * e2.x();  // 2*signed area
  for (std::size_t q = 0; q < ref_pts.size(); ++q) {
    rule.points.push_back(a + ref_pts[q].x() * e1 + ref_pts[q].y() * e2);
    rule.weights.push_back(jac * ref_wts[q]);
  }
  ++rule.fan_triangles;
}

// Ear clipping for simple polygons; returns triangles as index triples.
std::vector<std::array<int, 3>> ear_clip(const std::vector<Vec2>& pts) {
  const int n = static_cast<int>(pts.size());
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::vector<std::array<int, 3>> tris;
  auto cross = [&](const Vec2& o, const Vec2& p, const Vec2& q) {
    return (p.x() - o.x()) * (q.y() - o.y()) - (p.y() - o.y()) * (q.x() - o.x());
  };
  int guard = 0;
  while (idx.size() > 3) {
    if (++guard > 10000) throw std::runtime_error("polygon_rule: ear clipping failed (invalid cell)");
    bool clipped = false;
    const int m = static_cast<int>(idx.size());
    for (int i = 0; i < m; ++i) {
      const int ia = idx[(i + m - 1) % m], ib = idx[i], ic = idx[(i + 1) % m];
      if (cross(pts[ia], pts[ib], pts[ic]) <= 0.0) continue;
      bool empty = true;
      for (int j = 0; j < m && empty; ++j) {
        const int ij = idx[j];
        if (ij == ia || ij == ib || ij == ic) continue;
        const bool inside = cross(pts[ia], pts[ib], pts[ij]) >= 0.0 &&
                            cross(pts[ib], pts[ic], pts[ij]) >= 0.0 &&
                            cross(pts[ic], pts[ia], pts[ij]) >= 0.0;
        if (inside) empty = false;
      }
      if (!empty) continue;
      tris.push_back({ia, ib, ic});
      idx.erase(idx.begin() + i);
      clipped = true;
      break;
    }
    if (!clipped) throw std::runtime_error("polygon_rule: no ear found (invalid cell)");
  }
  tris.push_back({idx[0], idx[1], idx[2]});
  return tris;
}

}  // namespace

PolygonRule polygon_rule(const std::vector<Vec2>& cell, int degree) {
  if (cell.size() < 3) throw std::invalid_argument("polygon_rule: fewer than 3 vertices");
  std::vector<Vec2> ref_pts;
  std::vector<double> ref_wts;
  duffy_triangle_rule(std::max(degree, 0), ref_pts, ref_wts);

  PolygonRule rule;
  rule.degree = degree;
  const std::size_t n = cell.size();
  if (polygon_star_from_centroid(cell)) {
    const Vec2 c = polygon_centroid(cell);
    for (std::size_t i = 0; i < n; ++i)
      append_triangle(rule, c, cell[i], cell[(i + 1) % n], ref_pts, ref_wts);
  } else {
    for (const auto& t : ear_clip(cell))
      append_triangle(rule, cell[t[0]], cell[t[1]], cell[t[2]], ref_pts, ref_wts);
  }
  return rule;
}

std::pair<int, int> MonomialBasis::exponents(int a) {
  int d = 0;
  while ((d + 1) * (d + 2) / 2 <= a) ++d;
  const int q = a - d * (d + 1) / 2;
  return {d - q, q};
}

double MonomialBasis::eval(int a, const Vec2& x) const {
  const auto [p, q] = exponents(a);
  const double xi = (x.x() - center.x()) / h;
  const double eta = (x.y() - center.y()) / h;
  return std::pow(xi, p) * std::pow(eta, q);
}

Vec2 MonomialBasis::grad(int a, const Vec2& x) const {
  const auto [p, q] = exponents(a);
  const double xi = (x.x() - center.x()) / h;
  const double eta = (x.y() - center.y()) / h;
  Vec2 g = Vec2::Zero();
  if (p > 0) g.x() = p * std::pow(xi, p - 1) * std::pow(eta, q) / h;
  if (q > 0) g.y() = q * std::pow(xi, p) * std::pow(eta, q - 1) / h;
  return g;
}

double MomentTable::product_moment(int a, int b) const {
  const auto [pa, qa] = MonomialBasis::exponents(a);
  const auto [pb, qb] = MonomialBasis::exponents(b);
  const int idx = MonomialBasis::index(pa + pb, qa + qb);
  return moments.at(idx);
}

MomentTable monomial_moments(const std::vector<Vec2>& cell, int max_degree) {
  MomentTable t;
  t.max_degree = max_degree;
  t.basis.center = polygon_centroid(cell);
  t.basis.h = polygon_diameter(cell);
  const int n = MonomialBasis::size(max_degree);
  t.moments.assign(n, 0.0);
  const PolygonRule rule = polygon_rule(cell, max_degree);
  for (std::size_t q = 0; q < rule.points.size(); ++q)
    for (int a = 0; a < n; ++a)
      t.moments[a] += rule.weights[q] * t.basis.eval(a, rule.points[q]);
  return t;
}

}  // namespace vemc
