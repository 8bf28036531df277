#pragma once

#include <string>
#include <vector>

#include "vemc/mesh.hpp"

namespace vemc {

/// Ordered contact boundary of one body: a connected polyline of Contact
/// edges, parameterized by arclength-style abscissa along a straight line.
/// For a flat trace the nodes lie on the line itself; for a chordal trace
/// (Hertz disk) the abscissa is the orthogonal projection onto the line.
struct BodyTrace {
  Vec2 origin, tangent;  // frame of the projection line
  bool collinear = true; // nodes lie on the line (within tolerance)
  struct Node {
    double s;
    int vertex;
  };
  std::vector<Node> nodes;        // sorted by s
  std::vector<int> span_edge;     // edge id of [nodes[i], nodes[i+1]]
  std::vector<int> span_cell;
};

/// Extract the ordered contact node list of a mesh. The contact edges must
/// form one connected polyline; nodes on a straight line (invalid-mesh error
/// otherwise). Duplicate nodes within 1e-12*h are merged.
BodyTrace extract_trace(const PolyMesh& mesh);

/// Matched contact decomposition after node insertion.
struct ContactTrace {
  Vec2 origin, tangent;
  Vec2 n1;  // unit outward normal of the slave body on the line
  struct Node {
    double s = 0.0;
    int slave_vertex = -1, master_vertex = -1;
    Vec2 slave_pos, master_pos;
  };
  std::vector<Node> nodes;
  struct Edge {
    int slave_edge = -1, master_edge = -1;
    int slave_cell = -1, master_cell = -1;
  };
  std::vector<Edge> edges;  // edges[l] spans nodes[l] .. nodes[l+1]
  int lstar() const { return static_cast<int>(nodes.size()) - 1; }
};

struct InsertionResult {
  PolyMesh slave, master;
  ContactTrace trace;
};

/// Node insertion algorithm: each mesh gains the other's contact nodes as
/// new polygon vertices (boundary edges split in place, geometry unchanged)
/// so the two contact decompositions coincide. The first mesh is the slave.
/// May create small edges. Throws on traces spanning different segments.
InsertionResult insert_matching_nodes(const PolyMesh& slave, const PolyMesh& master);

/// Initial gap g0 >= 0 along the contact line.
struct GapFunction {
  enum class Kind { Zero, Circular, Tabulated };
  Kind kind = Kind::Zero;
  // circular: g0 = R - sqrt(R^2 - (s - s_touch)^2)
  double R = 0.0;
  double s_touch = 0.0;
  Vec2 origin = Vec2::Zero(), tangent = Vec2::UnitX();
  std::vector<std::pair<double, double>> table;  // (s, g), sorted

  static GapFunction zero();
  static GapFunction circular(double R, const Vec2& origin, const Vec2& tangent,
                              double s_touch);
  static GapFunction tabulated(const Vec2& origin, const Vec2& tangent,
                               std::vector<std::pair<double, double>> table);

  double at_abscissa(double s) const;
};

/// Evaluate g0 at a point x on the contact line (within 1e-12 of it).
double evaluate_gap(const GapFunction& g, const Vec2& x);

/// Debug dump: node coordinates, pairing indices, gap samples.
std::string trace_to_json(const ContactTrace& trace, const GapFunction& gap);

}  // namespace vemc
