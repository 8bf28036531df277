#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "vemc/geometry.hpp"

namespace vemc {

enum class BoundaryLabel { Unset, Dirichlet, Neumann, Contact };

char label_char(BoundaryLabel l);
BoundaryLabel label_from_char(char c);

/// Polygonal decomposition of one body. Cells are CCW vertex-index loops;
/// the edge table is derived by finalize(). Collinear edges are permitted
/// (a straight polygon side may consist of several edges).
struct PolyMesh {
  std::vector<Vec2> vertices;
  std::vector<std::vector<int>> cells;
  int body_id = 1;

  struct Edge {
    int v0 = -1, v1 = -1;        // canonical: v0 < v1
    int cell_a = -1, cell_b = -1;  // adjacent cells (cell_b == -1 on boundary)
    BoundaryLabel label = BoundaryLabel::Unset;
    bool boundary() const { return cell_b < 0; }
  };
  std::vector<Edge> edges;
  std::vector<std::vector<int>> cell_edges;  // per cell, edge id of (loop[i], loop[i+1])

  /// Rebuild the edge table and validate areas/orientation/conformity.
  /// Existing labels survive when the endpoint pair is unchanged.
  void finalize();

  int num_cells() const { return static_cast<int>(cells.size()); }
  int num_vertices() const { return static_cast<int>(vertices.size()); }
  std::vector<Vec2> cell_points(int c) const;
  double cell_area(int c) const { return polygon_signed_area(cell_points(c)); }

  Vec2 edge_midpoint(int e) const {
    return 0.5 * (vertices[edges[e].v0] + vertices[edges[e].v1]);
  }
  double edge_length(int e) const {
    return (vertices[edges[e].v1] - vertices[edges[e].v0]).norm();
  }
  /// Canonical normal of the directed edge v0->v1 (rotate tangent by -90°).
  Vec2 edge_canonical_normal(int e) const {
    return edge_outward_normal(vertices[edges[e].v0], vertices[edges[e].v1]);
  }
  /// Outward normal of a boundary edge w.r.t. its unique cell.
  Vec2 edge_outward_normal_of(int e) const;

  /// Label every boundary edge whose midpoint satisfies the predicate.
  void label_boundary(const std::function<bool(const Vec2&)>& pred, BoundaryLabel l);
  bool has_label(BoundaryLabel l) const;

  /// Throws if any boundary edge is still Unset.
  void require_fully_labeled() const;
};

struct MeshQualityReport {
  double h = 0.0;    // max cell diameter
  double h_m = 0.0;  // global min edge length
  std::vector<double> h_K;
  std::vector<double> h_mK;
  double log_factor = 0.0;  // max_K log(1 + h_K/h_m(K))
  std::vector<bool> star_center_ok;
};

MeshQualityReport quality_report(const PolyMesh& mesh);
MeshQualityReport quality_report(const PolyMesh& m1, const PolyMesh& m2);

/// Plain-text mesh format, lossless at 17 significant digits:
///   VEMMESH 1
///   <nv>            followed by nv "x y" lines
///   <nc>            followed by nc "n i0 i1 ... i{n-1}" lines
///   <nb>            followed by nb "edge v0 v1 {D|N|C}" lines
void save_mesh(const PolyMesh& mesh, const std::string& path);
PolyMesh load_mesh(const std::string& path);
void write_mesh(const PolyMesh& mesh, std::ostream& os);
PolyMesh read_mesh(std::istream& is);

}  // namespace vemc
