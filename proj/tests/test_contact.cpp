#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "json.hpp"
#include "vemc/contact.hpp"
#include "vemc/mesh_gen.hpp"

using namespace vemc;

namespace {
const double tol = 1e-9;

void label_square_body(PolyMesh& m, double y_dirichlet) {
  m.label_boundary([](const Vec2& x) { return std::abs(x.y()) < tol; },
                   BoundaryLabel::Contact);
  m.label_boundary(
      [y_dirichlet](const Vec2& x) { return std::abs(x.y() - y_dirichlet) < tol; },
      BoundaryLabel::Dirichlet);
  m.label_boundary(
      [](const Vec2& x) { return std::abs(x.x()) < tol || std::abs(x.x() - 1) < tol; },
      BoundaryLabel::Neumann);
}

// single-cell unit square on (0,1)^2 with an extra collinear contact node
PolyMesh one_cell_with_node(double s) {
  PolyMesh m;
  m.vertices = {{0, 0}, {s, 0}, {1, 0}, {1, 1}, {0, 1}};
  m.cells = {{0, 1, 2, 3, 4}};
  m.finalize();
  label_square_body(m, 1.0);
  return m;
}
}  // namespace

TEST_CASE("extract_trace: ordered nodes on a grid") {
  PolyMesh m = build_square_mesh({0, 0, 1, 1}, 2);
  label_square_body(m, 1.0);
  const BodyTrace tr = extract_trace(m);
  REQUIRE(tr.nodes.size() == 3);
  CHECK(tr.nodes[0].s == doctest::Approx(0.0));
  CHECK(tr.nodes[1].s == doctest::Approx(0.5));
  CHECK(tr.nodes[2].s == doctest::Approx(1.0));
  for (std::size_t i = 0; i + 1 < tr.nodes.size(); ++i)
    CHECK(tr.nodes[i].s < tr.nodes[i + 1].s);

  PolyMesh plain = build_square_mesh({0, 0, 1, 1}, 2);
  CHECK_THROWS_AS(extract_trace(plain), std::invalid_argument);
}

TEST_CASE("insert_matching_nodes: sorted union of abscissae") {
  PolyMesh m1 = build_square_mesh({0, -1, 1, 0}, 2);  // contact nodes 0, 0.5, 1
  label_square_body(m1, -1.0);
  PolyMesh m2 = one_cell_with_node(0.25);  // contact nodes 0, 0.25, 1

  const InsertionResult res = insert_matching_nodes(m1, m2);
  REQUIRE(res.trace.nodes.size() == 4);
  const double expect[4] = {0.0, 0.25, 0.5, 1.0};
  for (int i = 0; i < 4; ++i) {
    CHECK(res.trace.nodes[i].s == doctest::Approx(expect[i]).epsilon(1e-14));
    CHECK((res.trace.nodes[i].slave_pos - res.trace.nodes[i].master_pos).norm() < 1e-12);
  }
  CHECK(res.trace.lstar() == 3);
  // n1 points from the slave (below) toward the master
  CHECK(res.trace.n1.y() == doctest::Approx(1.0));

  // geometry preservation
  for (int c = 0; c < m1.num_cells(); ++c) {
    CHECK(std::abs(res.slave.cell_area(c) - m1.cell_area(c)) <
          1e-13 * std::abs(m1.cell_area(c)));
    CHECK(std::abs(polygon_perimeter(res.slave.cell_points(c)) -
                   polygon_perimeter(m1.cell_points(c))) < 1e-13);
  }

  // idempotence
  const InsertionResult again = insert_matching_nodes(res.slave, res.master);
  CHECK(again.trace.nodes.size() == res.trace.nodes.size());
  CHECK(again.slave.num_vertices() == res.slave.num_vertices());
  CHECK(again.master.num_vertices() == res.master.num_vertices());
}

TEST_CASE("insert_matching_nodes: already matching meshes are unchanged") {
  PolyMesh m1 = build_square_mesh({0, -1, 1, 0}, 2);
  label_square_body(m1, -1.0);
  PolyMesh m2 = build_square_mesh({0, 0, 1, 1}, 2);
  label_square_body(m2, 1.0);
  const InsertionResult res = insert_matching_nodes(m1, m2);
  CHECK(res.slave.num_vertices() == m1.num_vertices());
  CHECK(res.master.num_vertices() == m2.num_vertices());
  CHECK(res.trace.lstar() == 2);
}

TEST_CASE("insert_matching_nodes: span mismatch is an error") {
  PolyMesh m1 = build_square_mesh({0, -1, 1, 0}, 2);
  label_square_body(m1, -1.0);
  PolyMesh m2 = build_square_mesh({0.1, 0, 1.1, 1}, 2);
  m2.label_boundary([](const Vec2& x) { return std::abs(x.y()) < tol; },
                    BoundaryLabel::Contact);
  CHECK_THROWS_AS(insert_matching_nodes(m1, m2), std::invalid_argument);
}

TEST_CASE("gap function: kinds and guards") {
  const GapFunction z = GapFunction::zero();
  CHECK(evaluate_gap(z, Vec2(0.3, 0.0)) == 0.0);

  const GapFunction circ = GapFunction::circular(0.5, Vec2(0, 0), Vec2(1, 0), 0.0);
  CHECK(circ.at_abscissa(0.0) == 0.0);
  CHECK(circ.at_abscissa(0.3) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK_THROWS_AS(circ.at_abscissa(0.6), std::domain_error);
  CHECK_THROWS_AS(evaluate_gap(circ, Vec2(0.3, 0.5)), std::invalid_argument);

  const GapFunction tab = GapFunction::tabulated(
      Vec2(0, 0), Vec2(1, 0), {{0.0, 0.1}, {1.0, 0.3}});
  CHECK(tab.at_abscissa(0.5) == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("chordal slave trace: vertical projection pairing") {
  // disk-like slave above the line, flat master below
  PolyMesh disk = build_half_disk_mesh(0.5, 16);
  for (double sx : {-0.3, 0.3}) {
    for (std::size_t e = 0; e < disk.edges.size(); ++e) {
      if (!disk.edges[e].boundary()) continue;
      const Vec2 a = disk.vertices[disk.edges[e].v0];
      const Vec2 b = disk.vertices[disk.edges[e].v1];
      if (std::abs(a.y() - 0.5) < 1e-9 && std::abs(b.y() - 0.5) < 1e-9) continue;
      if ((a.x() - sx) * (b.x() - sx) >= 0.0) continue;
      const double t = (sx - a.x()) / (b.x() - a.x());
      split_boundary_edge_at(disk, a + t * (b - a), 1e-9);
      break;
    }
  }
  disk.label_boundary(
      [](const Vec2& x) {
        return std::abs(x.y() - 0.5) > 1e-9 && std::abs(x.x()) < 0.3 && x.y() < 0.25;
      },
      BoundaryLabel::Contact);
  for (auto& e : disk.edges)
    if (e.boundary() && e.label == BoundaryLabel::Unset) e.label = BoundaryLabel::Neumann;

  PolyMesh square = build_square_mesh({-0.5, -1, 0.5, 0}, 4);
  split_boundary_edge_at(square, {-0.3, 0.0}, 1e-9);
  split_boundary_edge_at(square, {0.3, 0.0}, 1e-9);
  square.label_boundary(
      [](const Vec2& x) { return std::abs(x.y()) < tol && std::abs(x.x()) < 0.3; },
      BoundaryLabel::Contact);
  square.label_boundary([](const Vec2& x) { return std::abs(x.y() + 1) < tol; },
                        BoundaryLabel::Dirichlet);
  for (auto& e : square.edges)
    if (e.boundary() && e.label == BoundaryLabel::Unset) e.label = BoundaryLabel::Neumann;

  const InsertionResult res = insert_matching_nodes(disk, square);
  // abscissae match even though slave nodes sit above the line
  const Vec2 t = res.trace.tangent;
  for (const auto& nd : res.trace.nodes) {
    CHECK(std::abs(t.dot(nd.slave_pos - nd.master_pos)) < 1e-12);
    CHECK((nd.slave_pos - nd.master_pos).dot(res.trace.n1) <= 1e-12);  // slave above
  }
  // n1 is the outward normal of the slave (disk): pointing down
  CHECK(res.trace.n1.y() == doctest::Approx(-1.0));

  // geometric gap grows away from the touch point and matches the circle
  const double s_touch = t.dot(Vec2(0, 0) - res.trace.origin);
  for (const auto& nd : res.trace.nodes) {
    const double geo = (nd.master_pos - nd.slave_pos).dot(res.trace.n1);
    const double s = nd.s - s_touch;
    const double circ = 0.5 - std::sqrt(0.25 - s * s);
    CHECK(geo >= -1e-12);
    CHECK(std::abs(geo - circ) < 0.02);  // chordal boundary vs circle
  }
}

TEST_CASE("trace json dump") {
  PolyMesh m1 = build_square_mesh({0, -1, 1, 0}, 2);
  label_square_body(m1, -1.0);
  PolyMesh m2 = build_square_mesh({0, 0, 1, 1}, 2);
  label_square_body(m2, 1.0);
  const InsertionResult res = insert_matching_nodes(m1, m2);
  const std::string js = trace_to_json(res.trace, GapFunction::zero());
  const nlohmann::json j = nlohmann::json::parse(js);
  CHECK(j["nodes"].size() == 3);
  CHECK(j["edges"].size() == 2);
  CHECK(j["nodes"][0]["g0"] == 0.0);
}
