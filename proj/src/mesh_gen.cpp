#include "vemc/mesh_gen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

namespace vemc {

PolyMesh build_square_mesh(const Rect& rect, int n) {
  if (n < 1) throw std::invalid_argument("build_square_mesh: n must be >= 1");
  if (!(rect.width() > 0.0) || !(rect.height() > 0.0))
    throw std::invalid_argument("build_square_mesh: degenerate rectangle");
  PolyMesh mesh;
  const double dx = rect.width() / n, dy = rect.height() / n;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      mesh.vertices.emplace_back(rect.x0 + i * dx, rect.y0 + j * dy);
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      mesh.cells.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
  mesh.finalize();
  return mesh;
}

namespace {

// Voronoi cell of seeds[i] clipped to rect, via successive half-plane clips
// against the perpendicular bisectors. O(N) clips per cell.
std::vector<Vec2> voronoi_cell(const std::vector<Vec2>& seeds, std::size_t i,
                               const Rect& rect) {
  std::vector<Vec2> poly = rect.corners();
  const Vec2 si = seeds[i];
  for (std::size_t j = 0; j < seeds.size(); ++j) {
    if (j == i) continue;
    const Vec2 d = seeds[j] - si;  // keep d.x <= d.(si+sj)/2
    poly = clip_halfplane(poly, d, d.dot(0.5 * (si + seeds[j])));
    if (poly.empty()) break;
  }
  return poly;
}

// Assemble per-cell loops into a conforming PolyMesh by welding vertices
// that coincide up to `tol`.
PolyMesh weld_cells(const std::vector<std::vector<Vec2>>& cell_loops, double tol) {
  PolyMesh mesh;
  // quantized lookup with neighbor probing so near-ties land on one vertex
  std::map<std::pair<long long, long long>, int> lookup;
  auto key_of = [tol](const Vec2& p) {
    return std::pair<long long, long long>(
        static_cast<long long>(std::floor(p.x() / tol)),
        static_cast<long long>(std::floor(p.y() / tol)));
  };
  auto vertex_id = [&](const Vec2& p) {
    const auto k = key_of(p);
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = lookup.find({k.first + dx, k.second + dy});
        if (it != lookup.end() && (mesh.vertices[it->second] - p).norm() <= tol)
          return it->second;
      }
    const int id = mesh.num_vertices();
    mesh.vertices.push_back(p);
    lookup[k] = id;
    return id;
  };
  for (const auto& loop : cell_loops) {
    std::vector<int> ids;
    for (const Vec2& p : loop) {
      const int id = vertex_id(p);
      if (ids.empty() || ids.back() != id) ids.push_back(id);
    }
    while (ids.size() > 1 && ids.front() == ids.back()) ids.pop_back();
    if (ids.size() < 3) throw std::runtime_error("weld_cells: degenerate cell");
    mesh.cells.push_back(std::move(ids));
  }
  mesh.finalize();
  return mesh;
}

PolyMesh clipped_voronoi(const std::vector<Vec2>& seeds, const Rect& rect,
                         int lloyd_sweeps) {
  std::vector<Vec2> pts = seeds;
  for (int sweep = 0; sweep < lloyd_sweeps; ++sweep) {
    std::vector<Vec2> next(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto cell = voronoi_cell(pts, i, rect);
      if (cell.size() < 3) throw std::runtime_error("voronoi: empty cell during relaxation");
      next[i] = polygon_centroid(cell);
    }
    pts = std::move(next);
  }
  std::vector<std::vector<Vec2>> loops(pts.size());
  double min_edge = std::numeric_limits<double>::max();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    loops[i] = voronoi_cell(pts, i, rect);
    if (loops[i].size() < 3 || polygon_signed_area(loops[i]) <= 0.0)
      throw std::runtime_error("voronoi: degenerate cell");
    const std::size_t n = loops[i].size();
    for (std::size_t a = 0; a < n; ++a)
      min_edge = std::min(min_edge, (loops[i][(a + 1) % n] - loops[i][a]).norm());
  }
  const double scale = std::min(rect.width(), rect.height());
  const double tol = std::min(1e-9 * scale, 0.25 * min_edge);
  return weld_cells(loops, std::max(tol, 1e-14 * scale));
}

}  // namespace

PolyMesh build_hexagonal_mesh(const Rect& rect, int target_count) {
  const int n = static_cast<int>(std::lround(std::sqrt(double(target_count))));
  if (n < 1 || n * n != target_count)
    throw std::invalid_argument("build_hexagonal_mesh: count must be a perfect square");
  std::vector<Vec2> seeds;
  const double dx = rect.width() / n, dy = rect.height() / n;
  for (int j = 0; j < n; ++j) {
    const double off = (j % 2 == 0) ? 0.25 : 0.75;
    for (int i = 0; i < n; ++i)
      seeds.emplace_back(rect.x0 + (i + off) * dx, rect.y0 + (j + 0.5) * dy);
  }
  return clipped_voronoi(seeds, rect, 0);
}

PolyMesh build_web_mesh(const Rect& rect, int target_count, std::uint64_t seed) {
  if (target_count < 1) throw std::invalid_argument("build_web_mesh: count must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(rect.x0, rect.x1), uy(rect.y0, rect.y1);
  for (int attempt = 0; attempt < 8; ++attempt) {
    std::vector<Vec2> seeds;
    seeds.reserve(target_count);
    for (int i = 0; i < target_count; ++i) seeds.emplace_back(ux(rng), uy(rng));
    try {
      return clipped_voronoi(seeds, rect, 3);
    } catch (const std::runtime_error&) {
      // degenerate configuration: retry with fresh jitter
    }
  }
  throw std::runtime_error("build_web_mesh: could not generate a valid mesh");
}

PolyMesh mirror_y(const PolyMesh& mesh) {
  PolyMesh out = mesh;
  for (Vec2& v : out.vertices) v.y() = -v.y();
  for (auto& loop : out.cells) std::reverse(loop.begin(), loop.end());
  out.finalize();
  return out;
}

PolyMesh perturb_contact_band(const PolyMesh& mesh, double lo, double hi,
                              std::uint64_t seed) {
  if (!(lo > 0.0) || !(lo <= hi) || !(hi < 0.5))
    throw std::invalid_argument("perturb_contact_band: need 0 < lo <= hi < 0.5");
  if (!mesh.has_label(BoundaryLabel::Contact))
    throw std::invalid_argument("perturb_contact_band: mesh has no Contact edges");

  const double h_max = quality_report(mesh).h;

  // contact-line adjacency: vertex -> lengths of its contact edges
  std::map<int, std::vector<double>> contact_len;
  std::map<int, Vec2> tangent_of;
  for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
    const auto& ed = mesh.edges[e];
    if (!ed.boundary() || ed.label != BoundaryLabel::Contact) continue;
    const double len = mesh.edge_length(static_cast<int>(e));
    contact_len[ed.v0].push_back(len);
    contact_len[ed.v1].push_back(len);
    const Vec2 t = (mesh.vertices[ed.v1] - mesh.vertices[ed.v0]).normalized();
    tangent_of[ed.v0] = t;
    tangent_of[ed.v1] = t;
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mag(lo, hi);
  std::bernoulli_distribution flip(0.5);

  PolyMesh out = mesh;
  for (const auto& [v, lens] : contact_len) {
    if (lens.size() < 2) continue;  // endpoint of the contact polyline: keep
    const double delta = mag(rng) * h_max;
    const double dir = flip(rng) ? 1.0 : -1.0;
    if (delta >= 0.45 * *std::min_element(lens.begin(), lens.end())) continue;
    const Vec2 moved = out.vertices[v] + dir * delta * tangent_of[v];
    const Vec2 saved = out.vertices[v];
    out.vertices[v] = moved;
    bool ok = true;
    for (int c = 0; c < out.num_cells() && ok; ++c) {
      bool touches = false;
      for (int w : out.cells[c]) touches |= (w == v);
      if (touches && polygon_signed_area(out.cell_points(c)) <= 0.0) ok = false;
    }
    if (!ok) out.vertices[v] = saved;  // skip node rather than invert a cell
  }
  out.finalize();
  return out;
}

int split_boundary_edge_at(PolyMesh& mesh, const Vec2& p, double tol) {
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if ((mesh.vertices[v] - p).norm() <= tol) return v;
  for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
    const auto& ed = mesh.edges[e];
    if (!ed.boundary()) continue;
    const Vec2 a = mesh.vertices[ed.v0], b = mesh.vertices[ed.v1];
    const Vec2 d = b - a;
    const double len2 = d.squaredNorm();
    const double t = d.dot(p - a) / len2;
    if (t <= 0.0 || t >= 1.0) continue;
    if ((a + t * d - p).norm() > tol) continue;
    const Vec2 on_edge = a + t * d;  // keep the point exactly on the segment
    const int nv = mesh.num_vertices();
    mesh.vertices.push_back(on_edge);
    auto& loop = mesh.cells[ed.cell_a];
    const int n = static_cast<int>(loop.size());
    const BoundaryLabel old_label = ed.label;
    for (int i = 0; i < n; ++i) {
      const int u = loop[i], w = loop[(i + 1) % n];
      if ((u == ed.v0 && w == ed.v1) || (u == ed.v1 && w == ed.v0)) {
        loop.insert(loop.begin() + i + 1, nv);
        mesh.finalize();
        for (auto& ne : mesh.edges)
          if ((ne.v0 == std::min(u, nv) && ne.v1 == std::max(u, nv)) ||
              (ne.v0 == std::min(w, nv) && ne.v1 == std::max(w, nv)))
            ne.label = old_label;
        return nv;
      }
    }
    throw std::logic_error("split_boundary_edge_at: loop inconsistent with edge table");
  }
  throw std::invalid_argument("split_boundary_edge_at: point not on a boundary edge");
}

PolyMesh build_half_disk_mesh(double R, int cell_count) {
  int rings = 2, sectors = 8;  // 16 cells at the coarsest level
  while (rings * sectors < cell_count) {
    rings *= 2;
    sectors *= 2;
  }
  if (rings * sectors != cell_count)
    throw std::invalid_argument("build_half_disk_mesh: count must be 16*4^L");

  const Vec2 center(0.0, R);
  PolyMesh mesh;
  // vertex grid: ring r = 1..rings, angle j = 0..sectors measured from the
  // left diameter endpoint, going through the bottom. The apex (ring 0) is
  // the single center vertex. Rings are graded toward the rim and sectors
  // toward the lowest point, where the contact zone sits.
  mesh.vertices.push_back(center);
  auto vid = [&](int r, int j) { return 1 + (r - 1) * (sectors + 1) + j; };
  const double c_ang = 0.5;    // angular density ratio centre : ends = 1 : (3-2c)
  const double p_rad = 0.75;   // radial exponent; < 1 thins the outer rings
  for (int r = 1; r <= rings; ++r) {
    const double rad = R * std::pow(double(r) / rings, p_rad);
    for (int j = 0; j <= sectors; ++j) {
      const double xi = -1.0 + 2.0 * j / sectors;
      const double s = c_ang * xi + (1.0 - c_ang) * xi * xi * xi;
      const double th = 1.5 * M_PI + 0.5 * M_PI * s;
      mesh.vertices.emplace_back(center.x() + rad * std::cos(th),
                                 center.y() + rad * std::sin(th));
    }
  }
  for (int j = 0; j < sectors; ++j)
    mesh.cells.push_back({0, vid(1, j + 1), vid(1, j)});
  for (int r = 1; r < rings; ++r)
    for (int j = 0; j < sectors; ++j)
      mesh.cells.push_back(
          {vid(r, j), vid(r, j + 1), vid(r + 1, j + 1), vid(r + 1, j)});
  // triangles above are ordered (center, j+1, j): check orientation
  for (auto& loop : mesh.cells)
    if (polygon_signed_area([&] {
          std::vector<Vec2> p;
          for (int v : loop) p.push_back(mesh.vertices[v]);
          return p;
        }()) < 0.0)
      std::reverse(loop.begin(), loop.end());
  mesh.finalize();
  return mesh;
}

}  // namespace vemc
