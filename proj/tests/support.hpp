// Test-side oracles, kept independent of the library's quadrature and
// element construction paths wherever the checks demand it.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "vemc/element.hpp"

namespace oracle {

using vemc::Vec2;

// Hardcoded 8-point Gauss-Legendre rule on [0,1] (Abramowitz & Stegun),
// exact through degree 15. Independent of the library's Newton-iterated rules.
inline const std::array<double, 8> kGx = {
    0.0198550717512319, 0.1016667612931866, 0.2372337950418355, 0.4082826787521751,
    0.5917173212478249, 0.7627662049581645, 0.8983332387068134, 0.9801449282487681};
inline const std::array<double, 8> kGw = {
    0.0506142681451881, 0.1111905172266872, 0.1568533229389436, 0.1813418916891810,
    0.1813418916891810, 0.1568533229389436, 0.1111905172266872, 0.0506142681451881};

// Integrate f over a triangle with a tensor rule on the collapsed square.
// Exact for polynomials of total degree <= 14.
template <class F>
double triangle_integral(const Vec2& a, const Vec2& b, const Vec2& c, F&& f) {
  const Vec2 e1 = b - a, e2 = c - a;
  const double jac = e1.x() * e2.y() - e1.y() * e2.x();
  double s = 0.0;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      const double u = kGx[i], v = kGx[j] * (1.0 - u);
      s += kGw[i] * kGw[j] * (1.0 - u) * f(a + u * e1 + v * e2);
    }
  return jac * s;
}

// Polygon integral by fan around the vertex average (signed, exact for any
// simple polygon).
template <class F>
double polygon_integral(const std::vector<Vec2>& pts, F&& f) {
  Vec2 apex = Vec2::Zero();
  for (const Vec2& p : pts) apex += p;
  apex /= double(pts.size());
  double s = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    s += triangle_integral(apex, pts[i], pts[(i + 1) % pts.size()], f);
  return s;
}

// Brute-force recursive-subdivision integrator: centroid rule per triangle
// at two depths, Richardson-extrapolated (midpoint error is O(h^2)).
template <class F>
double subdivision_integral(const std::vector<Vec2>& pts, F&& f, int depth = 8) {
  Vec2 apex = Vec2::Zero();
  for (const Vec2& p : pts) apex += p;
  apex /= double(pts.size());

  std::function<double(Vec2, Vec2, Vec2, int)> rec = [&](Vec2 a, Vec2 b, Vec2 c,
                                                         int d) -> double {
    if (d == 0) {
      const double area2 = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
      return 0.5 * area2 * f((a + b + c) / 3.0);
    }
    const Vec2 ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
    return rec(a, ab, ca, d - 1) + rec(ab, b, bc, d - 1) + rec(ca, bc, c, d - 1) +
           rec(ab, bc, ca, d - 1);
  };
  double coarse = 0.0, fine = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    coarse += rec(apex, pts[i], pts[(i + 1) % pts.size()], depth - 1);
    fine += rec(apex, pts[i], pts[(i + 1) % pts.size()], depth);
  }
  return (4.0 * fine - coarse) / 3.0;
}

// --- tiny symbolic vector polynomials over plain monomials x^p y^q ----------
struct Poly {
  // coefficient per (p, q) with p + q <= 4
  std::array<std::array<double, 5>, 5> c{};
  double eval(const Vec2& x) const {
    double s = 0.0;
    for (int p = 0; p <= 4; ++p)
      for (int q = 0; q <= 4 - p; ++q)
        if (c[p][q] != 0.0) s += c[p][q] * std::pow(x.x(), p) * std::pow(x.y(), q);
    return s;
  }
  Poly dx() const {
    Poly d;
    for (int p = 1; p <= 4; ++p)
      for (int q = 0; q <= 4 - p; ++q) d.c[p - 1][q] += p * c[p][q];
    return d;
  }
  Poly dy() const {
    Poly d;
    for (int p = 0; p <= 4; ++p)
      for (int q = 1; q <= 4 - p; ++q) d.c[p][q - 1] += q * c[p][q];
    return d;
  }
};

struct VecPoly {
  Poly x, y;
  Vec2 eval(const Vec2& p) const { return {x.eval(p), y.eval(p)}; }
  Poly div() const {
    Poly d = x.dx();
    const Poly dy = y.dy();
    for (int p = 0; p <= 4; ++p)
      for (int q = 0; q <= 4 - p; ++q) d.c[p][q] += dy.c[p][q];
    return d;
  }
  Eigen::Matrix2d grad(const Vec2& p) const {
    Eigen::Matrix2d g;
    g(0, 0) = x.dx().eval(p);
    g(0, 1) = x.dy().eval(p);
    g(1, 0) = y.dx().eval(p);
    g(1, 1) = y.dy().eval(p);
    return g;
  }
};

inline VecPoly random_vec_poly(int degree, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VecPoly v;
  for (int p = 0; p <= degree; ++p)
    for (int q = 0; q <= degree - p; ++q) {
      v.x.c[p][q] = u(rng);
      v.y.c[p][q] = u(rng);
    }
  return v;
}

// Independent evaluation of a^K(z, v_h) for a polynomial z and a virtual
// function v_h known through its DOFs:
//   a^K(z, v) = 2 mu [ \oint (eps(z) n) . v - \int div(eps(z)) . v ],
//   \int_K c . v = \oint ell_c (v.n) - \int_K ell_c div v,
// with all boundary terms from the edge traces (hardcoded Gauss rule) and
// div v rebuilt from scratch: the constant part from the boundary flux, the
// linear part from the raw internal moment DOFs with freshly computed
// monomial moments.
inline double ibp_energy(const vemc::LocalElement& el, const VecPoly& z,
                         const Eigen::VectorXd& dofs) {
  const int nv = el.layout.nv;
  const int k = el.layout.k;

  const Poly zxx = z.x.dx(), zxy = z.x.dy(), zyx = z.y.dx(), zyy = z.y.dy();
  auto eps = [&](const Vec2& p) {
    Eigen::Matrix2d e;
    e(0, 0) = zxx.eval(p);
    e(1, 1) = zyy.eval(p);
    e(0, 1) = e(1, 0) = 0.5 * (zxy.eval(p) + zyx.eval(p));
    return e;
  };

  // boundary term
  double boundary = 0.0;
  for (int i = 0; i < nv; ++i) {
    const Vec2 a = el.pts[i], b = el.pts[(i + 1) % nv];
    for (int g = 0; g < 8; ++g) {
      const Vec2 x = a + kGx[g] * (b - a);
      const Vec2 v = el.trace_value(i, kGx[g], dofs);
      boundary += kGw[g] * el.edge_len[i] * (eps(x) * el.edge_normal[i]).dot(v);
    }
  }

  // div v coefficients over {1, (x-xc)/h, (y-yc)/h}
  double flux = 0.0;
  for (int i = 0; i < nv; ++i)
    for (int g = 0; g < 8; ++g) {
      const Vec2 v = el.trace_value(i, kGx[g], dofs);
      flux += kGw[g] * el.edge_len[i] * v.dot(el.edge_normal[i]);
    }
  Eigen::Vector3d dcoef(flux / el.area, 0.0, 0.0);
  if (k == 2) {
    auto mono = [&](int a_idx, const Vec2& p) {
      if (a_idx == 1) return (p.x() - el.centroid.x()) / el.hK;
      return (p.y() - el.centroid.y()) / el.hK;
    };
    Eigen::Matrix2d M;
    for (int a_idx = 1; a_idx <= 2; ++a_idx)
      for (int b_idx = 1; b_idx <= 2; ++b_idx)
        M(a_idx - 1, b_idx - 1) = polygon_integral(el.pts, [&](const Vec2& p) {
          return mono(a_idx, p) * mono(b_idx, p);
        });
    const Eigen::Vector2d rhs(el.area / el.hK * dofs[el.layout.internal_dof(0)],
                              el.area / el.hK * dofs[el.layout.internal_dof(1)]);
    const Eigen::Vector2d d12 = M.fullPivLu().solve(rhs);
    dcoef[1] = d12[0];
    dcoef[2] = d12[1];
  }
  auto div_v = [&](const Vec2& p) {
    return dcoef[0] + dcoef[1] * (p.x() - el.centroid.x()) / el.hK +
           dcoef[2] * (p.y() - el.centroid.y()) / el.hK;
  };

  // volume term: div(eps(z)) is a polynomial vector c(x); for z of degree
  // <= 2 it is constant, which is all the elements use
  const Vec2 c(zxx.dx().eval(el.centroid) +
                   0.5 * (zxy.dy().eval(el.centroid) + zyx.dy().eval(el.centroid)),
               0.5 * (zxy.dx().eval(el.centroid) + zyx.dx().eval(el.centroid)) +
                   zyy.dy().eval(el.centroid));
  double volume = 0.0;
  if (c.norm() > 0.0) {
    for (int d = 0; d < 2; ++d) {
      if (c[d] == 0.0) continue;
      double bnd = 0.0;
      for (int i = 0; i < nv; ++i) {
        const Vec2 a = el.pts[i], b = el.pts[(i + 1) % nv];
        for (int g = 0; g < 8; ++g) {
          const Vec2 x = a + kGx[g] * (b - a);
          const Vec2 v = el.trace_value(i, kGx[g], dofs);
          const double ell = (d == 0) ? x.x() - el.centroid.x() : x.y() - el.centroid.y();
          bnd += kGw[g] * el.edge_len[i] * ell * v.dot(el.edge_normal[i]);
        }
      }
      const double vol = polygon_integral(el.pts, [&](const Vec2& p) {
        const double ell = (d == 0) ? p.x() - el.centroid.x() : p.y() - el.centroid.y();
        return ell * div_v(p);
      });
      volume += c[d] * (bnd - vol);
    }
  }
  return 2.0 * el.mu * (boundary - volume);
}

// DOFs of a test polynomial (independent of dofs_of_function: internal
// moments via the oracle polygon integral).
inline Eigen::VectorXd dofs_of_poly(const vemc::LocalElement& el, const VecPoly& z) {
  const int nv = el.layout.nv;
  Eigen::VectorXd d = Eigen::VectorXd::Zero(el.ndof());
  for (int i = 0; i < nv; ++i) {
    const Vec2 u = z.eval(el.pts[i]);
    d[el.layout.vertex_dof(i, 0)] = u.x();
    d[el.layout.vertex_dof(i, 1)] = u.y();
  }
  for (int i = 0; i < nv; ++i) {
    const Vec2 u = z.eval(el.edge_mid[i]);
    if (el.layout.k == 1)
      d[el.layout.edge_dof(i)] = u.dot(el.edge_normal[i]);
    else {
      d[el.layout.edge_dof(i, 0)] = u.x();
      d[el.layout.edge_dof(i, 1)] = u.y();
    }
  }
  if (el.layout.k == 2) {
    const Poly dv = z.div();
    for (int j = 0; j < 2; ++j) {
      const double mom = polygon_integral(el.pts, [&](const Vec2& p) {
        const double m = (j == 0) ? (p.x() - el.centroid.x()) / el.hK
                                  : (p.y() - el.centroid.y()) / el.hK;
        return dv.eval(p) * m;
      });
      d[el.layout.internal_dof(j)] = el.hK / el.area * mom;
    }
  }
  return d;
}

// Brute-force active-set enumeration for small contact problems: solves the
// equality-constrained saddle system for every subset of rows and returns
// the KKT-feasible minimizer.
struct ActiveSetResult {
  Eigen::VectorXd u, p, y;
  bool found = false;
};

inline ActiveSetResult enumerate_active_sets(const Eigen::MatrixXd& A,
                                             const Eigen::MatrixXd& B,
                                             const Eigen::MatrixXd& C,
                                             const Eigen::VectorXd& Fu,
                                             const Eigen::VectorXd& Fp,
                                             const Eigen::MatrixXd& G,
                                             const Eigen::VectorXd& g, double tol) {
  const int nu = static_cast<int>(A.rows());
  const int np = static_cast<int>(C.rows());
  const int m = static_cast<int>(G.rows());
  ActiveSetResult best;
  for (int mask = 0; mask < (1 << m); ++mask) {
    std::vector<int> act;
    for (int r = 0; r < m; ++r)
      if (mask & (1 << r)) act.push_back(r);
    const int na = static_cast<int>(act.size());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nu + np + na, nu + np + na);
    K.topLeftCorner(nu, nu) = A;
    K.block(nu, 0, np, nu) = B;
    K.block(0, nu, nu, np) = B.transpose();
    K.block(nu, nu, np, np) = -C;
    for (int i = 0; i < na; ++i) {
      K.block(nu + np + i, 0, 1, nu) = G.row(act[i]);
      K.block(0, nu + np + i, nu, 1) = G.row(act[i]).transpose();
    }
    Eigen::VectorXd rhs(nu + np + na);
    rhs.head(nu) = Fu;
    rhs.segment(nu, np) = Fp;
    for (int i = 0; i < na; ++i) rhs[nu + np + i] = g[act[i]];
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd x = lu.solve(rhs);
    const Eigen::VectorXd u = x.head(nu);
    const Eigen::VectorXd yact = x.tail(na);
    bool ok = true;
    for (int i = 0; i < na && ok; ++i)
      if (yact[i] < -tol) ok = false;
    const Eigen::VectorXd r = G * u - g;
    for (int i = 0; i < m && ok; ++i)
      if (r[i] > tol) ok = false;
    if (!ok) continue;
    best.found = true;
    best.u = u;
    best.p = x.segment(nu, np);
    best.y = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < na; ++i) best.y[act[i]] = yact[i];
    return best;
  }
  return best;
}

}  // namespace oracle
