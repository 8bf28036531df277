#include "vemc/element.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "json.hpp"

namespace vemc {

DofLayout dof_layout(int nv, int k) {
  if (k != 1 && k != 2) throw std::invalid_argument("dof_layout: k must be 1 or 2");
  DofLayout l;
  l.k = k;
  l.nv = nv;
  l.n_disp = (k == 1) ? 3 * nv : 4 * nv + 2;
  l.n_press = (k == 1) ? 1 : 3;
  return l;
}

namespace {

// quadratic Lagrange basis on {0, 1/2, 1}
inline void lagrange2(double xi, double& l0, double& lm, double& l1) {
  l0 = (1.0 - xi) * (1.0 - 2.0 * xi);
  lm = 4.0 * xi * (1.0 - xi);
  l1 = xi * (2.0 * xi - 1.0);
}

// Scalar monomial derivative: d/dx m_(p,q) = (p/h) m_(p-1,q), same for y.
// eps_c holds the three strain entries (e11, e22, e12) of each vector
// monomial as coefficient vectors over scalar monomials of degree <= k-1.
struct PolyStrains {
  std::vector<Eigen::VectorXd> e11, e22, e12, divg;
};

PolyStrains strain_tables(int k, double h) {
  const int nm = MonomialBasis::size(k);      // scalar monomials of deg <= k
  const int nm1 = MonomialBasis::size(k - 1); // deg <= k-1
  PolyStrains ps;
  const int np = 2 * nm;
  ps.e11.assign(np, Eigen::VectorXd::Zero(nm1));
  ps.e22.assign(np, Eigen::VectorXd::Zero(nm1));
  ps.e12.assign(np, Eigen::VectorXd::Zero(nm1));
  ps.divg.assign(np, Eigen::VectorXd::Zero(nm1));
  for (int a = 0; a < nm; ++a) {
    const auto [p, q] = MonomialBasis::exponents(a);
    Eigen::VectorXd dx = Eigen::VectorXd::Zero(nm1), dy = Eigen::VectorXd::Zero(nm1);
    if (p > 0) dx[MonomialBasis::index(p - 1, q)] = p / h;
    if (q > 0) dy[MonomialBasis::index(p, q - 1)] = q / h;
    // z = (m_a, 0): e11 = dx m, e22 = 0, e12 = dy m / 2, div = dx m
    ps.e11[2 * a] = dx;
    ps.e12[2 * a] = 0.5 * dy;
    ps.divg[2 * a] = dx;
    // z = (0, m_a): e22 = dy m, e12 = dx m / 2, div = dy m
    ps.e22[2 * a + 1] = dy;
    ps.e12[2 * a + 1] = 0.5 * dx;
    ps.divg[2 * a + 1] = dy;
  }
  return ps;
}

double dot_moment(const MomentTable& mt, const Eigen::VectorXd& ca,
                  const Eigen::VectorXd& cb) {
  double s = 0.0;
  for (int a = 0; a < ca.size(); ++a) {
    if (ca[a] == 0.0) continue;
    for (int b = 0; b < cb.size(); ++b)
      if (cb[b] != 0.0) s += ca[a] * cb[b] * mt.product_moment(a, b);
  }
  return s;
}

}  // namespace

Eigen::MatrixXd LocalElement::trace_form(int edge, double xi) const {
  double l0, lm, l1;
  lagrange2(xi, l0, lm, l1);
  const Eigen::MatrixXd& T = edge_trace[edge];
  Eigen::MatrixXd f(2, ndof());
  f.row(0) = l0 * T.row(0) + lm * T.row(1) + l1 * T.row(2);
  f.row(1) = l0 * T.row(3) + lm * T.row(4) + l1 * T.row(5);
  return f;
}

Vec2 LocalElement::trace_value(int edge, double xi, const Eigen::VectorXd& dofs) const {
  const Eigen::MatrixXd f = trace_form(edge, xi);
  return {f.row(0).dot(dofs), f.row(1).dot(dofs)};
}

Vec2 LocalElement::poly_value(const Eigen::VectorXd& coeffs, const Vec2& x) const {
  Vec2 v = Vec2::Zero();
  const int nm = np / 2;
  for (int a = 0; a < nm; ++a) {
    const double m = moments.basis.eval(a, x);
    v.x() += coeffs[2 * a] * m;
    v.y() += coeffs[2 * a + 1] * m;
  }
  return v;
}

Eigen::Matrix2d LocalElement::poly_grad(const Eigen::VectorXd& coeffs,
                                        const Vec2& x) const {
  Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
  const int nm = np / 2;
  for (int a = 0; a < nm; ++a) {
    const Vec2 gm = moments.basis.grad(a, x);
    g.row(0) += coeffs[2 * a] * gm.transpose();
    g.row(1) += coeffs[2 * a + 1] * gm.transpose();
  }
  return g;
}

LocalElement build_local_element(const std::vector<Vec2>& cell_pts, int k,
                                 double mu, StabMode mode) {
  LocalElement el;
  el.pts = cell_pts;
  el.mu = mu;
  el.stab_mode = mode;
  const int nv = static_cast<int>(cell_pts.size());
  el.layout = dof_layout(nv, k);
  const int nd = el.layout.n_disp;

  el.area = polygon_signed_area(cell_pts);
  el.hK = polygon_diameter(cell_pts);
  el.perimeter = polygon_perimeter(cell_pts);
  el.centroid = polygon_centroid(cell_pts);
  if (!(el.area > 1e-14 * el.hK * el.hK))
    throw std::runtime_error("element: degenerate cell (area ~ 0)");

  el.moments = monomial_moments(cell_pts, 2 * k);
  const MonomialBasis& mb = el.moments.basis;
  const int nm = MonomialBasis::size(k);
  el.nm1 = MonomialBasis::size(k - 1);
  el.np = 2 * nm;
  const int nq = el.layout.n_press;

  // --- edge geometry and nodal trace operators -----------------------------
  el.edge_trace.resize(nv);
  el.edge_len.resize(nv);
  el.edge_normal.resize(nv);
  el.edge_tangent.resize(nv);
  el.edge_mid.resize(nv);
  for (int i = 0; i < nv; ++i) {
    const Vec2 a = cell_pts[i], b = cell_pts[(i + 1) % nv];
    const Vec2 t = (b - a).normalized();
    const Vec2 n(t.y(), -t.x());
    el.edge_len[i] = (b - a).norm();
    el.edge_tangent[i] = t;
    el.edge_normal[i] = n;
    el.edge_mid[i] = 0.5 * (a + b);

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(6, nd);
    const int va = i, vb = (i + 1) % nv;
    T(0, el.layout.vertex_dof(va, 0)) = 1.0;
    T(2, el.layout.vertex_dof(vb, 0)) = 1.0;
    T(3, el.layout.vertex_dof(va, 1)) = 1.0;
    T(5, el.layout.vertex_dof(vb, 1)) = 1.0;
    if (k == 1) {
      // midpoint value: (v.t)(1/2) t + Xi_e n, with (v.t) linear
      for (int comp = 0; comp < 2; ++comp) {
        const double tc = (comp == 0) ? t.x() : t.y();
        const double nc = (comp == 0) ? n.x() : n.y();
        T(1 + 3 * comp, el.layout.vertex_dof(va, 0)) += 0.5 * tc * t.x();
        T(1 + 3 * comp, el.layout.vertex_dof(va, 1)) += 0.5 * tc * t.y();
        T(1 + 3 * comp, el.layout.vertex_dof(vb, 0)) += 0.5 * tc * t.x();
        T(1 + 3 * comp, el.layout.vertex_dof(vb, 1)) += 0.5 * tc * t.y();
        T(1 + 3 * comp, el.layout.edge_dof(i)) += nc;
      }
    } else {
      T(1, el.layout.edge_dof(i, 0)) = 1.0;
      T(4, el.layout.edge_dof(i, 1)) = 1.0;
    }
    el.edge_trace[i] = std::move(T);
  }

  const EdgeRule erule = edge_rule(2 * k + 1);

  // --- divergence map: DOFs -> coefficients of div v over {m_l} ------------
  el.div_map = Eigen::MatrixXd::Zero(el.nm1, nd);
  {
    Eigen::RowVectorXd flux = Eigen::RowVectorXd::Zero(nd);
    for (int i = 0; i < nv; ++i)
      for (std::size_t g = 0; g < erule.points.size(); ++g) {
        const double w = el.edge_len[i] * erule.weights[g];
        const Eigen::MatrixXd f = el.trace_form(i, erule.points[g]);
        flux += w * (el.edge_normal[i].x() * f.row(0) + el.edge_normal[i].y() * f.row(1));
      }
    el.div_map.row(0) = flux / el.area;
    if (k == 2) {
      Eigen::Matrix2d M;
      M << el.moments.product_moment(1, 1), el.moments.product_moment(2, 1),
          el.moments.product_moment(1, 2), el.moments.product_moment(2, 2);
      Eigen::Matrix2d Minv = M.inverse();
      // rows for d1, d2 from the internal moment DOFs
      Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(2, nd);
      rhs(0, el.layout.internal_dof(0)) = el.area / el.hK;
      rhs(1, el.layout.internal_dof(1)) = el.area / el.hK;
      const Eigen::MatrixXd d12 = Minv * rhs;
      el.div_map.row(1) = d12.row(0);
      el.div_map.row(2) = d12.row(1);
    }
  }

  // --- first moments: \int_K v . e_d -------------------------------------
  el.first_moment = Eigen::MatrixXd::Zero(2, nd);
  for (int d = 0; d < 2; ++d) {
    Eigen::RowVectorXd fm = Eigen::RowVectorXd::Zero(nd);
    for (int i = 0; i < nv; ++i)
      for (std::size_t g = 0; g < erule.points.size(); ++g) {
        const double w = el.edge_len[i] * erule.weights[g];
        const Eigen::MatrixXd f = el.trace_form(i, erule.points[g]);
        const Vec2 x = cell_pts[i] + erule.points[g] * (cell_pts[(i + 1) % nv] - cell_pts[i]);
        const double ell = (d == 0) ? (x.x() - el.centroid.x()) : (x.y() - el.centroid.y());
        fm += w * ell *
              (el.edge_normal[i].x() * f.row(0) + el.edge_normal[i].y() * f.row(1));
      }
    // minus \int_K ell_d div v, with ell_d = hK * m_{1+d}
    for (int l = 0; l < el.nm1; ++l)
      fm -= el.hK * el.moments.product_moment(1 + d, l) * el.div_map.row(l);
    el.first_moment.row(d) = fm;
  }

  // --- polynomial strain tables and G ------------------------------------
  const PolyStrains ps = strain_tables(k, el.hK);
  el.G = Eigen::MatrixXd::Zero(el.np, el.np);
  for (int a = 0; a < el.np; ++a)
    for (int b = 0; b < el.np; ++b)
      el.G(a, b) = 2.0 * mu *
                   (dot_moment(el.moments, ps.e11[a], ps.e11[b]) +
                    dot_moment(el.moments, ps.e22[a], ps.e22[b]) +
                    2.0 * dot_moment(el.moments, ps.e12[a], ps.e12[b]));

  // --- B: a^K(z_alpha, phi_i) via integration by parts --------------------
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(el.np, nd);
  for (int i = 0; i < nv; ++i) {
    const Vec2 n = el.edge_normal[i];
    for (std::size_t g = 0; g < erule.points.size(); ++g) {
      const double w = el.edge_len[i] * erule.weights[g];
      const Eigen::MatrixXd f = el.trace_form(i, erule.points[g]);
      const Vec2 x = cell_pts[i] + erule.points[g] * (cell_pts[(i + 1) % nv] - cell_pts[i]);
      Eigen::VectorXd mvals(el.nm1);
      for (int l = 0; l < el.nm1; ++l) mvals[l] = mb.eval(l, x);
      for (int a = 0; a < el.np; ++a) {
        const double e11 = ps.e11[a].dot(mvals);
        const double e22 = ps.e22[a].dot(mvals);
        const double e12 = ps.e12[a].dot(mvals);
        const double c0 = e11 * n.x() + e12 * n.y();
        const double c1 = e12 * n.x() + e22 * n.y();
        B.row(a) += 2.0 * mu * w * (c0 * f.row(0) + c1 * f.row(1));
      }
    }
  }
  if (k == 2) {
    // volume term: -2mu \int div(eps(z)) . v with div(eps(z)) constant
    for (int a = 0; a < el.np; ++a) {
      // d/dx e11 + d/dy e12 and d/dx e12 + d/dy e22; entries are linear
      // in the scaled monomials so the derivative is the coefficient / hK
      auto ddx = [&](const Eigen::VectorXd& c) { return c[1] / el.hK; };
      auto ddy = [&](const Eigen::VectorXd& c) { return c[2] / el.hK; };
      const double cx = ddx(ps.e11[a]) + ddy(ps.e12[a]);
      const double cy = ddx(ps.e12[a]) + ddy(ps.e22[a]);
      B.row(a) -= 2.0 * mu * (cx * el.first_moment.row(0) + cy * el.first_moment.row(1));
    }
  }

  // --- rigid-mode pinning operators ---------------------------------------
  // P_1, P_2: boundary averages of the components; P_3 against (-m_eta, m_xi)
  Eigen::MatrixXd Pdof = Eigen::MatrixXd::Zero(3, nd);
  for (int i = 0; i < nv; ++i)
    for (std::size_t g = 0; g < erule.points.size(); ++g) {
      const double w = el.edge_len[i] * erule.weights[g] / el.perimeter;
      const Eigen::MatrixXd f = el.trace_form(i, erule.points[g]);
      const Vec2 x = cell_pts[i] + erule.points[g] * (cell_pts[(i + 1) % nv] - cell_pts[i]);
      Pdof.row(0) += w * f.row(0);
      Pdof.row(1) += w * f.row(1);
      Pdof.row(2) += w * (-mb.eval(2, x) * f.row(0) + mb.eval(1, x) * f.row(1));
    }

  // same operators applied to the monomial basis
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(3, el.np);
  for (int i = 0; i < nv; ++i)
    for (std::size_t g = 0; g < erule.points.size(); ++g) {
      const double w = el.edge_len[i] * erule.weights[g] / el.perimeter;
      const Vec2 x = cell_pts[i] + erule.points[g] * (cell_pts[(i + 1) % nv] - cell_pts[i]);
      for (int a = 0; a < nm; ++a) {
        const double m = mb.eval(a, x);
        R(0, 2 * a) += w * m;
        R(1, 2 * a + 1) += w * m;
        R(2, 2 * a) += w * (-mb.eval(2, x) * m);
        R(2, 2 * a + 1) += w * (mb.eval(1, x) * m);
      }
    }

  // --- DOFs of the monomial basis -----------------------------------------
  el.dof_of_poly = Eigen::MatrixXd::Zero(nd, el.np);
  for (int a = 0; a < nm; ++a) {
    for (int i = 0; i < nv; ++i) {
      const double mv = mb.eval(a, cell_pts[i]);
      el.dof_of_poly(el.layout.vertex_dof(i, 0), 2 * a) = mv;
      el.dof_of_poly(el.layout.vertex_dof(i, 1), 2 * a + 1) = mv;
    }
    for (int i = 0; i < nv; ++i) {
      const double mv = mb.eval(a, el.edge_mid[i]);
      if (k == 1) {
        el.dof_of_poly(el.layout.edge_dof(i), 2 * a) = mv * el.edge_normal[i].x();
        el.dof_of_poly(el.layout.edge_dof(i), 2 * a + 1) = mv * el.edge_normal[i].y();
      } else {
        el.dof_of_poly(el.layout.edge_dof(i, 0), 2 * a) = mv;
        el.dof_of_poly(el.layout.edge_dof(i, 1), 2 * a + 1) = mv;
      }
    }
    if (k == 2) {
      for (int j = 0; j < 2; ++j)
        for (int c = 0; c < 2; ++c) {
          double v = 0.0;
          for (int l = 0; l < el.nm1; ++l)
            v += ps.divg[2 * a + c][l] * el.moments.product_moment(l, 1 + j);
          el.dof_of_poly(el.layout.internal_dof(j), 2 * a + c) = el.hK / el.area * v;
        }
    }
  }

  // --- projector: (G + c R^T R) proj = B + c R^T Pdof ---------------------
  // Solve the consistent stacked system [G; s R] proj = [B; s Pdof] by QR:
  // the pinning rows remove the rigid-mode kernel of G and the stacked
  // least-squares route avoids squaring the condition number.
  const double s = std::sqrt(el.G.trace());
  Eigen::MatrixXd S(el.np + 3, el.np);
  S.topRows(el.np) = el.G;
  S.bottomRows(3) = s * R;
  Eigen::MatrixXd rhs(el.np + 3, nd);
  rhs.topRows(el.np) = B;
  rhs.bottomRows(3) = s * Pdof;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(S);
  if (qr.rank() < el.np)
    throw std::runtime_error("element: singular projector system");
  const auto& Rdiag = qr.matrixQR().diagonal();
  const double cond_est =
      std::abs(Rdiag[0]) / std::max(std::abs(Rdiag[el.np - 1]), 1e-300);
  if (cond_est > 1e12)
    std::cerr << "vemc: projector system condition ~" << cond_est
              << " on a cell with hK " << el.hK << "\n";
  el.proj = qr.solve(rhs);
  el.proj += qr.solve(rhs - S * el.proj);  // one refinement step

  // --- stiffness -----------------------------------------------------------
  el.consistency = el.proj.transpose() * el.G * el.proj;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(nd, nd);
  const Eigen::MatrixXd Pi_dof = el.dof_of_poly * el.proj;
  const double sigma = (mode == StabMode::Scaled) ? 2.0 * mu : 1.0;
  el.stab = sigma * (I - Pi_dof).transpose() * (I - Pi_dof);
  el.stiffness = el.consistency + el.stab;

  // --- divergence matrix and pressure mass --------------------------------
  el.divergence = Eigen::MatrixXd::Zero(nq, nd);
  el.pressure_mass = Eigen::MatrixXd::Zero(nq, nq);
  for (int j = 0; j < nq; ++j) {
    for (int l = 0; l < el.nm1; ++l)
      el.divergence.row(j) += el.moments.product_moment(j, l) * el.div_map.row(l);
    for (int l = 0; l < nq; ++l)
      el.pressure_mass(j, l) = el.moments.product_moment(j, l);
  }
  return el;
}

Eigen::VectorXd dofs_of_function(
    const LocalElement& el, const std::function<Vec2(const Vec2&)>& u,
    const std::function<double(const Vec2&)>& div_u) {
  const int k = el.layout.k;
  Eigen::VectorXd d = Eigen::VectorXd::Zero(el.ndof());
  const int nv = el.layout.nv;
  for (int i = 0; i < nv; ++i) {
    const Vec2 uv = u(el.pts[i]);
    d[el.layout.vertex_dof(i, 0)] = uv.x();
    d[el.layout.vertex_dof(i, 1)] = uv.y();
  }
  for (int i = 0; i < nv; ++i) {
    const Vec2 um = u(el.edge_mid[i]);
    if (k == 1) {
      d[el.layout.edge_dof(i)] = um.dot(el.edge_normal[i]);
    } else {
      d[el.layout.edge_dof(i, 0)] = um.x();
      d[el.layout.edge_dof(i, 1)] = um.y();
    }
  }
  if (k == 2) {
    if (!div_u) throw std::invalid_argument("dofs_of_function: div u required for k=2");
    const PolygonRule rule = polygon_rule(el.pts, 2 * k + 2);
    for (int j = 0; j < 2; ++j) {
      double v = 0.0;
      for (std::size_t q = 0; q < rule.points.size(); ++q)
        v += rule.weights[q] * div_u(rule.points[q]) *
             el.moments.basis.eval(1 + j, rule.points[q]);
      d[el.layout.internal_dof(j)] = el.hK / el.area * v;
    }
  }
  return d;
}

Eigen::VectorXd local_load(const LocalElement& el,
                           const std::function<Vec2(const Vec2&)>& f) {
  const PolygonRule rule = polygon_rule(el.pts, 2 * el.layout.k + 2);
  Vec2 fbar = Vec2::Zero();
  for (std::size_t q = 0; q < rule.points.size(); ++q)
    fbar += rule.weights[q] * f(rule.points[q]);
  fbar /= el.area;
  return el.first_moment.row(0).transpose() * fbar.x() +
         el.first_moment.row(1).transpose() * fbar.y();
}

namespace {
nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}
}  // namespace

std::string element_to_json(const LocalElement& el) {
  nlohmann::json j;
  j["k"] = el.layout.k;
  j["area"] = el.area;
  j["hK"] = el.hK;
  j["centroid"] = {el.centroid.x(), el.centroid.y()};
  j["proj"] = matrix_json(el.proj);
  j["stiffness"] = matrix_json(el.stiffness);
  j["consistency"] = matrix_json(el.consistency);
  j["stab"] = matrix_json(el.stab);
  j["divergence"] = matrix_json(el.divergence);
  j["pressure_mass"] = matrix_json(el.pressure_mass);
  j["first_moment"] = matrix_json(el.first_moment);
  return j.dump(2);
}

}  // namespace vemc
