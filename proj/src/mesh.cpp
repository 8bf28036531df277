#include "vemc/mesh.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace vemc {

char label_char(BoundaryLabel l) {
  switch (l) {
    case BoundaryLabel::Dirichlet: return 'D';
    case BoundaryLabel::Neumann: return 'N';
    case BoundaryLabel::Contact: return 'C';
    default: return '?';
  }
}

BoundaryLabel label_from_char(char c) {
  switch (c) {
    case 'D': return BoundaryLabel::Dirichlet;
    case 'N': return BoundaryLabel::Neumann;
    case 'C': return BoundaryLabel::Contact;
    default: throw std::invalid_argument("unknown boundary label");
  }
}

std::vector<Vec2> PolyMesh::cell_points(int c) const {
  std::vector<Vec2> pts;
  pts.reserve(cells[c].size());
  for (int v : cells[c]) pts.push_back(vertices[v]);
  return pts;
}

Vec2 PolyMesh::edge_outward_normal_of(int e) const {
  const Edge& ed = edges[e];
  if (!ed.boundary()) throw std::logic_error("outward normal of interior edge");
  // find the directed occurrence in the owning cell
  const auto& loop = cells[ed.cell_a];
  const int n = static_cast<int>(loop.size());
  for (int i = 0; i < n; ++i) {
    const int a = loop[i], b = loop[(i + 1) % n];
    if ((a == ed.v0 && b == ed.v1) || (a == ed.v1 && b == ed.v0))
      return edge_outward_normal(vertices[a], vertices[b]);
  }
  throw std::logic_error("edge not found in owning cell");
}

void PolyMesh::finalize() {
  // preserve labels of existing boundary edges across rebuilds
  std::map<std::pair<int, int>, BoundaryLabel> old_labels;
  for (const Edge& e : edges)
    if (e.label != BoundaryLabel::Unset) old_labels[{e.v0, e.v1}] = e.label;

  edges.clear();
  cell_edges.assign(cells.size(), {});
  std::map<std::pair<int, int>, int> lookup;

  for (int c = 0; c < num_cells(); ++c) {
    const auto& loop = cells[c];
    const int n = static_cast<int>(loop.size());
    if (n < 3) throw std::runtime_error("mesh: cell with fewer than 3 vertices");
    const double area = polygon_signed_area(cell_points(c));
    if (!(area > 0.0)) throw std::runtime_error("mesh: cell not CCW or degenerate");
    cell_edges[c].resize(n);
    for (int i = 0; i < n; ++i) {
      const int a = loop[i], b = loop[(i + 1) % n];
      if (a == b) throw std::runtime_error("mesh: zero-length edge in loop");
      const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
      auto it = lookup.find(key);
      if (it == lookup.end()) {
        Edge e;
        e.v0 = key.first;
        e.v1 = key.second;
        e.cell_a = c;
        lookup[key] = static_cast<int>(edges.size());
        cell_edges[c][i] = static_cast<int>(edges.size());
        edges.push_back(e);
      } else {
        Edge& e = edges[it->second];
        if (e.cell_b >= 0) throw std::runtime_error("mesh: edge shared by >2 cells");
        // conformity: second traversal must be in the opposite direction
        const auto& first_loop = cells[e.cell_a];
        const int m = static_cast<int>(first_loop.size());
        bool same_dir = false;
        for (int j = 0; j < m; ++j)
          if (first_loop[j] == a && first_loop[(j + 1) % m] == b) same_dir = true;
        if (same_dir) throw std::runtime_error("mesh: non-conforming edge orientation");
        e.cell_b = c;
        cell_edges[c][i] = it->second;
      }
    }
  }
  for (Edge& e : edges) {
    if (!e.boundary()) continue;
    auto it = old_labels.find({e.v0, e.v1});
    if (it != old_labels.end()) e.label = it->second;
  }
}

void PolyMesh::label_boundary(const std::function<bool(const Vec2&)>& pred,
                              BoundaryLabel l) {
  for (Edge& e : edges)
    if (e.boundary() && pred(edge_midpoint(static_cast<int>(&e - edges.data()))))
      e.label = l;
}

bool PolyMesh::has_label(BoundaryLabel l) const {
  for (const Edge& e : edges)
    if (e.boundary() && e.label == l) return true;
  return false;
}

void PolyMesh::require_fully_labeled() const {
  for (const Edge& e : edges)
    if (e.boundary() && e.label == BoundaryLabel::Unset)
      throw std::runtime_error("mesh: unlabeled boundary edge");
}

MeshQualityReport quality_report(const PolyMesh& mesh) {
  MeshQualityReport r;
  r.h_K.resize(mesh.num_cells());
  r.h_mK.resize(mesh.num_cells());
  r.star_center_ok.resize(mesh.num_cells());
  r.h_m = std::numeric_limits<double>::max();
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto pts = mesh.cell_points(c);
    r.h_K[c] = polygon_diameter(pts);
    double hm = std::numeric_limits<double>::max();
    for (int e : mesh.cell_edges[c]) hm = std::min(hm, mesh.edge_length(e));
    r.h_mK[c] = hm;
    r.star_center_ok[c] = polygon_star_from_centroid(pts);
    r.h = std::max(r.h, r.h_K[c]);
    r.h_m = std::min(r.h_m, hm);
    r.log_factor = std::max(r.log_factor, std::log(1.0 + r.h_K[c] / hm));
  }
  return r;
}

MeshQualityReport quality_report(const PolyMesh& m1, const PolyMesh& m2) {
  MeshQualityReport a = quality_report(m1);
  const MeshQualityReport b = quality_report(m2);
  a.h = std::max(a.h, b.h);
  a.h_m = std::min(a.h_m, b.h_m);
  a.log_factor = std::max(a.log_factor, b.log_factor);
  a.h_K.insert(a.h_K.end(), b.h_K.begin(), b.h_K.end());
  a.h_mK.insert(a.h_mK.end(), b.h_mK.begin(), b.h_mK.end());
  a.star_center_ok.insert(a.star_center_ok.end(), b.star_center_ok.begin(),
                          b.star_center_ok.end());
  return a;
}

void write_mesh(const PolyMesh& mesh, std::ostream& os) {
  char buf[64];
  os << "VEMMESH 1\n";
  os << mesh.num_vertices() << "\n";
  for (const Vec2& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g", v.x(), v.y());
    os << buf << "\n";
  }
  os << mesh.num_cells() << "\n";
  for (const auto& loop : mesh.cells) {
    os << loop.size();
    for (int i : loop) os << ' ' << i;
    os << "\n";
  }
  std::vector<const PolyMesh::Edge*> labeled;
  for (const auto& e : mesh.edges)
    if (e.boundary() && e.label != BoundaryLabel::Unset) labeled.push_back(&e);
  os << labeled.size() << "\n";
  for (const auto* e : labeled)
    os << "edge " << e->v0 << ' ' << e->v1 << ' ' << label_char(e->label) << "\n";
}

PolyMesh read_mesh(std::istream& is) {
  std::string magic;
  int version = 0;
  is >> magic >> version;
  if (magic != "VEMMESH" || version != 1)
    throw std::runtime_error("mesh file: bad header");
  PolyMesh mesh;
  int nv = 0;
  is >> nv;
  mesh.vertices.resize(nv);
  for (int i = 0; i < nv; ++i) is >> mesh.vertices[i].x() >> mesh.vertices[i].y();
  int nc = 0;
  is >> nc;
  mesh.cells.resize(nc);
  for (int c = 0; c < nc; ++c) {
    int n = 0;
    is >> n;
    mesh.cells[c].resize(n);
    for (int i = 0; i < n; ++i) is >> mesh.cells[c][i];
  }
  mesh.finalize();
  int nb = 0;
  is >> nb;
  for (int i = 0; i < nb; ++i) {
    std::string kw;
    int a = 0, b = 0;
    char l = '?';
    is >> kw >> a >> b >> l;
    if (kw != "edge") throw std::runtime_error("mesh file: expected 'edge'");
    bool found = false;
    for (auto& e : mesh.edges)
      if (e.v0 == std::min(a, b) && e.v1 == std::max(a, b)) {
        e.label = label_from_char(l);
        found = true;
        break;
      }
    if (!found) throw std::runtime_error("mesh file: label for unknown edge");
  }
  if (!is) throw std::runtime_error("mesh file: truncated");
  return mesh;
}

void save_mesh(const PolyMesh& mesh, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_mesh(mesh, os);
}

PolyMesh load_mesh(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_mesh(is);
}

}  // namespace vemc
