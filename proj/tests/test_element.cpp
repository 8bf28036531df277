#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "vemc/element.hpp"
#include "vemc/mesh_gen.hpp"

using namespace vemc;

namespace {
const std::vector<Vec2> unit_square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};

std::vector<Vec2> pentagon() {
  std::vector<Vec2> p;
  for (int i = 0; i < 5; ++i) {
    const double th = 2.0 * M_PI * i / 5.0 + 0.4;
    p.emplace_back(0.3 + 0.8 * std::cos(th), -0.2 + 0.8 * std::sin(th));
  }
  return p;
}

Eigen::VectorXd poly_coeffs(const LocalElement& el, const oracle::VecPoly& z) {
  // least-squares fit of z in the element's vector monomial basis: z is a
  // polynomial of degree <= k so the fit is exact
  const int nm = el.np / 2;
  const PolygonRule r = polygon_rule(el.pts, 2 * el.layout.k + 2);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(el.np, el.np);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(el.np);
  for (std::size_t q = 0; q < r.points.size(); ++q) {
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(el.np);
    for (int a = 0; a < nm; ++a) {
      const double m = el.moments.basis.eval(a, r.points[q]);
      phi[2 * a] = m;
      phi[2 * a + 1] = m;
    }
    const Vec2 v = z.eval(r.points[q]);
    for (int a = 0; a < nm; ++a) {
      for (int b = 0; b < nm; ++b) {
        M(2 * a, 2 * b) += r.weights[q] * phi[2 * a] * phi[2 * b];
        M(2 * a + 1, 2 * b + 1) += r.weights[q] * phi[2 * a + 1] * phi[2 * b + 1];
      }
      rhs[2 * a] += r.weights[q] * phi[2 * a] * v.x();
      rhs[2 * a + 1] += r.weights[q] * phi[2 * a + 1] * v.y();
    }
  }
  return M.fullPivLu().solve(rhs);
}
}  // namespace

TEST_CASE("dof layout counts") {
  CHECK(dof_layout(4, 1).n_disp == 12);
  CHECK(dof_layout(4, 1).n_press == 1);
  CHECK(dof_layout(4, 2).n_disp == 18);
  CHECK(dof_layout(4, 2).n_press == 3);
  CHECK(dof_layout(5, 2).n_disp == 22);
  CHECK_THROWS_AS(dof_layout(4, 3), std::invalid_argument);
}

TEST_CASE("boundary trace: constants, bubble, linear reproduction") {
  for (int k : {1, 2}) {
    const LocalElement el = build_local_element(pentagon(), k, 1.0);
    // constant translation
    Eigen::VectorXd d = Eigen::VectorXd::Zero(el.ndof());
    auto c = [](const Vec2&) { return Vec2(0.7, -0.3); };
    d = dofs_of_function(el, c, [](const Vec2&) { return 0.0; });
    for (int e = 0; e < el.layout.nv; ++e)
      for (double xi : {0.0, 0.25, 0.5, 0.9}) {
        const Vec2 v = el.trace_value(e, xi, d);
        CHECK(v.x() == doctest::Approx(0.7).epsilon(1e-14));
        CHECK(v.y() == doctest::Approx(-0.3).epsilon(1e-14));
      }
    // v = (x, 0): exact linear trace
    d = dofs_of_function(
        el, [](const Vec2& x) { return Vec2(x.x(), 0.0); },
        [](const Vec2&) { return 1.0; });
    for (int e = 0; e < el.layout.nv; ++e)
      for (double xi : {0.0, 0.3, 1.0}) {
        const Vec2 x = el.pts[e] + xi * (el.pts[(e + 1) % el.layout.nv] - el.pts[e]);
        CHECK(el.trace_value(e, xi, d).x() == doctest::Approx(x.x()).epsilon(1e-13));
      }
  }
  // k=1 normal bubble: one midpoint-normal DOF set to 1
  const LocalElement el = build_local_element(unit_square, 1, 1.0);
  Eigen::VectorXd d = Eigen::VectorXd::Zero(el.ndof());
  d[el.layout.edge_dof(0)] = 1.0;
  for (double xi : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const double vn = el.trace_value(0, xi, d).dot(el.edge_normal[0]);
    CHECK(vn == doctest::Approx(4.0 * xi * (1.0 - xi)).epsilon(1e-14));
  }
}

TEST_CASE("divergence DOFs from boundary") {
  std::mt19937_64 rng(11);
  for (int k : {1, 2}) {
    const LocalElement el = build_local_element(pentagon(), k, 1.0);
    // v = (x, 0): div = 1
    const Eigen::VectorXd d = oracle::dofs_of_poly(el, [] {
      oracle::VecPoly v;
      v.x.c[1][0] = 1.0;
      return v;
    }());
    const Eigen::VectorXd dc = el.div_map * d;
    CHECK(dc[0] == doctest::Approx(1.0).epsilon(1e-13));
    for (int l = 1; l < dc.size(); ++l) CHECK(std::abs(dc[l]) < 1e-13);

    // rigid rotation (-(y-yc), x-xc): div = 0
    oracle::VecPoly rot;
    rot.x.c[0][1] = -1.0;
    rot.x.c[0][0] = el.centroid.y();
    rot.y.c[1][0] = 1.0;
    rot.y.c[0][0] = -el.centroid.x();
    const Eigen::VectorXd dr = el.div_map * oracle::dofs_of_poly(el, rot);
    for (int l = 0; l < dr.size(); ++l) CHECK(std::abs(dr[l]) < 1e-13);

    // random degree-k polynomial: coefficients match symbolic divergence
    const oracle::VecPoly z = oracle::random_vec_poly(k, rng);
    const Eigen::VectorXd dz = el.div_map * oracle::dofs_of_poly(el, z);
    const oracle::Poly dv = z.div();
    for (const Vec2& x : el.pts) {
      double got = 0.0;
      for (int l = 0; l < dz.size(); ++l) got += dz[l] * el.moments.basis.eval(l, x);
      CHECK(std::abs(got - dv.eval(x)) < 1e-12);
    }
  }
}

TEST_CASE("energy projector: reproduction, pinning, orthogonality") {
  std::mt19937_64 rng(5);
  for (int k : {1, 2}) {
    const LocalElement el = build_local_element(pentagon(), k, 1.3);
    // polynomial reproduction through the DOF matrix
    const Eigen::MatrixXd PD = el.proj * el.dof_of_poly;
    CHECK((PD - Eigen::MatrixXd::Identity(el.np, el.np)).cwiseAbs().maxCoeff() < 1e-12);

    // reproduction of a random polynomial, coefficient route
    const oracle::VecPoly z = oracle::random_vec_poly(k, rng);
    const Eigen::VectorXd coeffs = poly_coeffs(el, z);
    const Eigen::VectorXd proj = el.project(oracle::dofs_of_poly(el, z));
    CHECK((proj - coeffs).norm() < 1e-12 * std::max(1.0, coeffs.norm()));

    // orthogonality: a^K(z, v - Pi v) = 0 for all monomials z, via the
    // independent integration-by-parts oracle
    Eigen::VectorXd v(el.ndof());
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < v.size(); ++i) v[i] = u(rng);
    const Eigen::VectorXd pv = el.project(v);
    const Eigen::VectorXd v_proj_dofs = el.dof_of_poly * pv;
    for (int a = 0; a < el.np; ++a) {
      oracle::VecPoly zm;  // monomial basis member in global coordinates
      // express scaled monomial m_a e_c as an oracle::VecPoly by sampling:
      // build from exponents directly
      const auto [p, q] = MonomialBasis::exponents(a / 2);
      oracle::Poly mono;
      // ((x-xc)/h)^p ((y-yc)/h)^q expanded via binomials up to degree 2
      const double xc = el.centroid.x(), yc = el.centroid.y(), h = el.hK;
      for (int i = 0; i <= p; ++i)
        for (int j = 0; j <= q; ++j) {
          auto binom = [](int n, int r) {
            double b = 1;
            for (int t = 0; t < r; ++t) b = b * (n - t) / (t + 1);
            return b;
          };
          mono.c[i][j] += binom(p, i) * std::pow(-xc, p - i) * binom(q, j) *
                          std::pow(-yc, q - j) / std::pow(h, p + q);
        }
      if (a % 2 == 0)
        zm.x = mono;
      else
        zm.y = mono;
      const double lhs = oracle::ibp_energy(el, zm, v);
      const double rhs = oracle::ibp_energy(el, zm, v_proj_dofs);
      CHECK(std::abs(lhs - rhs) < 1e-10 * std::max(1.0, v.norm()));
    }
  }
}

TEST_CASE("local stiffness: kernel, polynomial energy, stabilization") {
  for (int k : {1, 2}) {
    const double mu = 0.8;
    const LocalElement el = build_local_element(pentagon(), k, mu, StabMode::Literal);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(el.stiffness);
    int zeros = 0;
    const double emax = es.eigenvalues().maxCoeff();
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
      if (es.eigenvalues()[i] < 1e-10 * emax)
        ++zeros;
      else
        CHECK(es.eigenvalues()[i] > 0.0);
    }
    CHECK(zeros == 3);

    // polynomial energy on the unit square: z = (x,0), w = (x,0) gives
    // 2 mu \int eps:eps = 2 mu; z = (y,0): eps = [[0,.5],[.5,0]] gives mu
    const LocalElement sq = build_local_element(unit_square, k, mu);
    oracle::VecPoly zx, zy;
    zx.x.c[1][0] = 1.0;
    zy.x.c[0][1] = 1.0;
    const Eigen::VectorXd dx = oracle::dofs_of_poly(sq, zx);
    const Eigen::VectorXd dy = oracle::dofs_of_poly(sq, zy);
    CHECK(dx.dot(sq.stiffness * dx) == doctest::Approx(2.0 * mu).epsilon(1e-12));
    CHECK(dy.dot(sq.stiffness * dy) == doctest::Approx(mu).epsilon(1e-12));

    // v with Pi v = 0: a_h(v,v) = sum_j Xi_j(v)^2 in literal mode
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    Eigen::VectorXd v(el.ndof());
    for (int i = 0; i < v.size(); ++i) v[i] = u(rng);
    const Eigen::VectorXd vc = v - el.dof_of_poly * el.project(v);
    CHECK(el.project(vc).norm() < 1e-11 * std::max(1.0, v.norm()));
    CHECK(vc.dot(el.stiffness * vc) ==
          doctest::Approx(vc.squaredNorm()).epsilon(1e-10));
    CHECK(vc.dot(el.stiffness * vc) > 0.0);
  }
}

TEST_CASE("k-consistency against the independent route") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k : {1, 2}) {
    for (const auto& cell : {unit_square, pentagon()}) {
      const LocalElement el = build_local_element(cell, k, 1.7);
      const oracle::VecPoly z = oracle::random_vec_poly(k, rng);
      const Eigen::VectorXd dz = oracle::dofs_of_poly(el, z);
      Eigen::VectorXd v(el.ndof());
      for (int i = 0; i < v.size(); ++i) v[i] = u(rng);
      const double ah = dz.dot(el.stiffness * v);
      const double exact = oracle::ibp_energy(el, z, v);
      CHECK(std::abs(ah - exact) < 1e-11 * std::max(1.0, std::abs(exact)));
    }
  }
}

TEST_CASE("divergence matrix: classics and quadrature oracle") {
  std::mt19937_64 rng(23);
  for (int k : {1, 2}) {
    const LocalElement sq = build_local_element(unit_square, k, 1.0);
    oracle::VecPoly zx;
    zx.x.c[1][0] = 1.0;  // v = (x, 0)
    CHECK(sq.divergence.row(0).dot(oracle::dofs_of_poly(sq, zx)) ==
          doctest::Approx(1.0).epsilon(1e-13));

    oracle::VecPoly rot;
    rot.x.c[0][1] = -1.0;
    rot.y.c[1][0] = 1.0;
    const Eigen::VectorXd br = sq.divergence * oracle::dofs_of_poly(sq, rot);
    CHECK(br.cwiseAbs().maxCoeff() < 1e-13);

    // random polynomial v against every pressure basis member on a pentagon
    const LocalElement el = build_local_element(pentagon(), k, 1.0);
    const oracle::VecPoly z = oracle::random_vec_poly(k, rng);
    const Eigen::VectorXd bz = el.divergence * oracle::dofs_of_poly(el, z);
    const oracle::Poly dv = z.div();
    for (int j = 0; j < el.nq(); ++j) {
      const double exact = oracle::polygon_integral(el.pts, [&](const Vec2& p) {
        return dv.eval(p) * el.moments.basis.eval(j, p);
      });
      CHECK(std::abs(bz[j] - exact) < 1e-12 * std::max(1.0, std::abs(exact)));
    }

    // constant-pressure row equals the boundary flux (divergence theorem)
    Eigen::VectorXd v(el.ndof());
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < v.size(); ++i) v[i] = u(rng);
    double flux = 0.0;
    for (int e = 0; e < el.layout.nv; ++e)
      for (int g = 0; g < 8; ++g)
        flux += oracle::kGw[g] * el.edge_len[e] *
                el.trace_value(e, oracle::kGx[g], v).dot(el.edge_normal[e]);
    CHECK(std::abs(el.divergence.row(0).dot(v) - flux) <
          1e-13 * std::max(1.0, std::abs(flux)));
  }
}

TEST_CASE("pressure mass: classics") {
  const LocalElement k1 = build_local_element(unit_square, 1, 1.0);
  REQUIRE(k1.pressure_mass.rows() == 1);
  CHECK(k1.pressure_mass(0, 0) == doctest::Approx(1.0).epsilon(1e-14));

  const LocalElement k2 = build_local_element(unit_square, 2, 1.0);
  REQUIRE(k2.pressure_mass.rows() == 3);
  CHECK(std::abs(k2.pressure_mass(0, 1)) < 1e-14);
  CHECK(k2.pressure_mass(1, 1) == doctest::Approx(1.0 / 24.0).epsilon(1e-13));
}

TEST_CASE("load vector: zero, rigid, quadrature oracle") {
  std::mt19937_64 rng(31);
  for (int k : {1, 2}) {
    const LocalElement el = build_local_element(pentagon(), k, 1.0);
    const Eigen::VectorXd zero =
        local_load(el, [](const Vec2&) { return Vec2(0, 0); });
    CHECK(zero.norm() == 0.0);

    // constant f against a rigid translation: f . t |K|
    const Vec2 f(0.3, -1.1), t(2.0, 0.5);
    const Eigen::VectorXd load = local_load(el, [&](const Vec2&) { return f; });
    const Eigen::VectorXd dt = dofs_of_function(
        el, [&](const Vec2&) { return t; }, [](const Vec2&) { return 0.0; });
    CHECK(load.dot(dt) == doctest::Approx(f.dot(t) * el.area).epsilon(1e-13));

    // polynomial inputs: load . dofs(v) = \int (Pi0 f) . v with both the
    // projection of f and the moment of v reproduced by the oracle
    const oracle::VecPoly z = oracle::random_vec_poly(k, rng);
    auto fpoly = [](const Vec2& x) {
      return Vec2(x.x() * x.x() + x.y(), x.x() * x.y() - 2.0);
    };
    const Eigen::VectorXd lf = local_load(el, fpoly);
    Vec2 fbar = Vec2::Zero();
    fbar.x() = oracle::polygon_integral(el.pts, [&](const Vec2& x) {
      return fpoly(x).x();
    });
    fbar.y() = oracle::polygon_integral(el.pts, [&](const Vec2& x) {
      return fpoly(x).y();
    });
    fbar /= el.area;
    const double exact = oracle::polygon_integral(el.pts, [&](const Vec2& x) {
      return fbar.dot(z.eval(x));
    });
    CHECK(std::abs(lf.dot(oracle::dofs_of_poly(el, z)) - exact) <
          1e-12 * std::max(1.0, std::abs(exact)));
  }
}

TEST_CASE("translation invariance of the local matrices") {
  std::vector<Vec2> moved = pentagon();
  for (Vec2& p : moved) p += Vec2(13.7, -4.2);
  for (int k : {1, 2}) {
    const LocalElement a = build_local_element(pentagon(), k, 1.0);
    const LocalElement b = build_local_element(moved, k, 1.0);
    CHECK((a.stiffness - b.stiffness).cwiseAbs().maxCoeff() <
          1e-12 * a.stiffness.cwiseAbs().maxCoeff());
    CHECK((a.divergence - b.divergence).cwiseAbs().maxCoeff() <
          1e-12 * std::max(1.0, a.divergence.cwiseAbs().maxCoeff()));
    CHECK((a.pressure_mass - b.pressure_mass).cwiseAbs().maxCoeff() <
          1e-12 * a.pressure_mass.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("stability: positivity outside the rigid modes") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k : {1, 2}) {
    const LocalElement el = build_local_element(pentagon(), k, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::VectorXd v(el.ndof());
      for (int i = 0; i < v.size(); ++i) v[i] = u(rng);
      const Eigen::VectorXd vc = v - el.dof_of_poly * el.project(v);
      if (vc.norm() < 1e-12) continue;
      CHECK(vc.dot(el.stiffness * vc) > 0.0);
    }
    // rigid modes have zero energy
    for (auto rigid : {Vec2(1.0, 0.0), Vec2(0.0, 1.0)}) {
      const Eigen::VectorXd d = dofs_of_function(
          el, [&](const Vec2&) { return rigid; }, [](const Vec2&) { return 0.0; });
      CHECK(std::abs(d.dot(el.stiffness * d)) < 1e-12);
    }
  }
}

TEST_CASE("graded disk cells: reproduction within the anisotropy penalty") {
  // the polar disk mesh contains stretched triangles; the projector loses a
  // couple of digits there but stays far below any solve tolerance
  const PolyMesh disk = build_half_disk_mesh(0.5, 64);
  for (int c = 0; c < disk.num_cells(); ++c)
    for (int k : {1, 2}) {
      const LocalElement el = build_local_element(disk.cell_points(c), k, 1.0);
      const Eigen::MatrixXd PD = el.proj * el.dof_of_poly;
      CHECK((PD - Eigen::MatrixXd::Identity(el.np, el.np)).cwiseAbs().maxCoeff() <
            5e-12);
    }
}

TEST_CASE("degenerate cell is rejected") {
  const std::vector<Vec2> sliver{{0, 0}, {1, 0}, {2, 1e-16}};
  CHECK_THROWS_AS(build_local_element(sliver, 1, 1.0), std::runtime_error);
}

TEST_CASE("element json dump") {
  const LocalElement el = build_local_element(unit_square, 1, 1.0);
  const std::string js = element_to_json(el);
  CHECK(js.find("stiffness") != std::string::npos);
  CHECK(js.find("proj") != std::string::npos);
}
