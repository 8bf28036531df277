#include "vemc/contact.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "vemc/mesh_gen.hpp"
#include "json.hpp"

namespace vemc {

namespace {

struct Polyline {
  std::vector<int> verts;   // ordered open chain
  std::vector<int> edges;   // edges[i] joins verts[i], verts[i+1]
  std::vector<int> cells;
};

// Chain the Contact edges of a mesh into one open polyline.
Polyline chain_contact_edges(const PolyMesh& mesh) {
  std::map<int, std::vector<int>> adj;  // vertex -> contact edge ids
  std::size_t n_contact = 0;
  for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
    const auto& ed = mesh.edges[e];
    if (ed.boundary() && ed.label == BoundaryLabel::Contact) {
      ++n_contact;
      adj[ed.v0].push_back(static_cast<int>(e));
      adj[ed.v1].push_back(static_cast<int>(e));
    }
  }
  if (n_contact == 0)
    throw std::invalid_argument("extract_trace: mesh has no Contact edges");
  std::vector<int> endpoints;
  for (const auto& [v, es] : adj) {
    if (es.size() > 2)
      throw std::invalid_argument("extract_trace: branching contact boundary");
    if (es.size() == 1) endpoints.push_back(v);
  }
  if (endpoints.size() != 2)
    throw std::invalid_argument("extract_trace: contact edges are disconnected or closed");

  Polyline pl;
  int v = endpoints[0];
  int prev_edge = -1;
  pl.verts.push_back(v);
  while (true) {
    int next_edge = -1;
    for (int e : adj[v])
      if (e != prev_edge) next_edge = e;
    if (next_edge < 0) break;
    const auto& ed = mesh.edges[next_edge];
    const int w = (ed.v0 == v) ? ed.v1 : ed.v0;
    pl.verts.push_back(w);
    pl.edges.push_back(next_edge);
    pl.cells.push_back(ed.cell_a);
    prev_edge = next_edge;
    v = w;
  }
  if (pl.edges.size() != n_contact)
    throw std::invalid_argument("extract_trace: contact edges are disconnected");
  return pl;
}

// Orient a polyline so the frame abscissa increases along it.
void orient_by_frame(const PolyMesh& mesh, Polyline& pl, const Vec2& origin,
                     const Vec2& tangent) {
  const double s_front = tangent.dot(mesh.vertices[pl.verts.front()] - origin);
  const double s_back = tangent.dot(mesh.vertices[pl.verts.back()] - origin);
  if (s_back < s_front) {
    std::reverse(pl.verts.begin(), pl.verts.end());
    std::reverse(pl.edges.begin(), pl.edges.end());
    std::reverse(pl.cells.begin(), pl.cells.end());
  }
}

BodyTrace trace_with_frame(const PolyMesh& mesh, Polyline pl, const Vec2& origin,
                           const Vec2& tangent, bool require_collinear) {
  orient_by_frame(mesh, pl, origin, tangent);
  BodyTrace tr;
  tr.origin = origin;
  tr.tangent = tangent;
  const Vec2 nrm(-tangent.y(), tangent.x());

  double extent = 0.0;
  for (int v : pl.verts)
    extent = std::max(extent, (mesh.vertices[v] - mesh.vertices[pl.verts[0]]).norm());
  const double tol = 1e-12 * std::max(extent, 1.0);

  tr.collinear = true;
  for (int v : pl.verts)
    if (std::abs(nrm.dot(mesh.vertices[v] - origin)) > tol) tr.collinear = false;
  if (require_collinear && !tr.collinear)
    throw std::invalid_argument("extract_trace: contact edges not collinear");

  for (int v : pl.verts)
    tr.nodes.push_back({tangent.dot(mesh.vertices[v] - origin), v});
  tr.span_edge = pl.edges;
  tr.span_cell = pl.cells;

  for (std::size_t i = 0; i + 1 < tr.nodes.size(); ++i)
    if (tr.nodes[i + 1].s - tr.nodes[i].s <= tol)
      throw std::invalid_argument("extract_trace: duplicate or non-monotone contact nodes");
  return tr;
}

// Frame of a polyline: origin at the lexicographically smaller endpoint,
// tangent toward the other one.
void natural_frame(const PolyMesh& mesh, const Polyline& pl, Vec2& origin,
                   Vec2& tangent) {
  Vec2 a = mesh.vertices[pl.verts.front()];
  Vec2 b = mesh.vertices[pl.verts.back()];
  if (b.x() < a.x() || (b.x() == a.x() && b.y() < a.y())) std::swap(a, b);
  origin = a;
  tangent = (b - a).normalized();
}

}  // namespace

BodyTrace extract_trace(const PolyMesh& mesh) {
  const Polyline pl = chain_contact_edges(mesh);
  Vec2 origin, tangent;
  natural_frame(mesh, pl, origin, tangent);
  return trace_with_frame(mesh, pl, origin, tangent, true);
}

namespace {

// Insert vertices so the mesh's contact trace has a node at every abscissa
// in `targets` (w.r.t. the given frame). Inserted points land exactly on the
// existing boundary chain, preserving geometry.
void insert_abscissae(PolyMesh& mesh, const std::vector<double>& targets,
                      const Vec2& origin, const Vec2& tangent, double tol) {
  for (double s : targets) {
    const Polyline pl = chain_contact_edges(mesh);
    BodyTrace tr = trace_with_frame(mesh, pl, origin, tangent, false);
    bool present = false;
    for (const auto& n : tr.nodes) present |= std::abs(n.s - s) <= tol;
    if (present) continue;
    bool inserted = false;
    for (std::size_t i = 0; i + 1 < tr.nodes.size(); ++i) {
      if (s <= tr.nodes[i].s || s >= tr.nodes[i + 1].s) continue;
      const Vec2 a = mesh.vertices[tr.nodes[i].vertex];
      const Vec2 b = mesh.vertices[tr.nodes[i + 1].vertex];
      const double t = (s - tr.nodes[i].s) / (tr.nodes[i + 1].s - tr.nodes[i].s);
      split_boundary_edge_at(mesh, a + t * (b - a), 10 * tol);
      inserted = true;
      break;
    }
    if (!inserted)
      throw std::invalid_argument("insert_matching_nodes: abscissa outside trace span");
  }
}

}  // namespace

InsertionResult insert_matching_nodes(const PolyMesh& slave, const PolyMesh& master) {
  InsertionResult res;
  res.slave = slave;
  res.master = master;

  const Polyline pls0 = chain_contact_edges(res.slave);
  const Polyline plm0 = chain_contact_edges(res.master);
  Vec2 os, ts, om, tm;
  natural_frame(res.slave, pls0, os, ts);
  natural_frame(res.master, plm0, om, tm);
  const BodyTrace trs0 = trace_with_frame(res.slave, pls0, os, ts, false);
  const BodyTrace trm0 = trace_with_frame(res.master, plm0, om, tm, false);
  if (!trs0.collinear && !trm0.collinear)
    throw std::invalid_argument("insert_matching_nodes: neither trace is straight");

  // the straight trace defines the common line; prefer the master's
  const Vec2 origin = trm0.collinear ? om : os;
  const Vec2 tangent = trm0.collinear ? tm : ts;

  auto abscissae_of = [&](const PolyMesh& mesh, const Polyline& pl) {
    std::vector<double> s;
    for (int v : pl.verts) s.push_back(tangent.dot(mesh.vertices[v] - origin));
    std::sort(s.begin(), s.end());
    return s;
  };
  const std::vector<double> ss = abscissae_of(res.slave, pls0);
  const std::vector<double> sm = abscissae_of(res.master, plm0);

  const double span = std::max(ss.back() - ss.front(), sm.back() - sm.front());
  const double tol = 1e-12 * std::max(span, 1.0);
  if (std::abs(ss.front() - sm.front()) > tol || std::abs(ss.back() - sm.back()) > tol)
    throw std::invalid_argument("insert_matching_nodes: traces span different segments");

  std::vector<double> merged = ss;
  merged.insert(merged.end(), sm.begin(), sm.end());
  std::sort(merged.begin(), merged.end());
  std::vector<double> uniq;
  for (double s : merged)
    if (uniq.empty() || s - uniq.back() > tol) uniq.push_back(s);

  insert_abscissae(res.slave, uniq, origin, tangent, tol);
  insert_abscissae(res.master, uniq, origin, tangent, tol);

  const BodyTrace fs = trace_with_frame(res.slave, chain_contact_edges(res.slave),
                                        origin, tangent, false);
  const BodyTrace fm = trace_with_frame(res.master, chain_contact_edges(res.master),
                                        origin, tangent, false);
  if (fs.nodes.size() != fm.nodes.size() || fs.nodes.size() != uniq.size())
    throw std::runtime_error("insert_matching_nodes: node counts differ after insertion");

  ContactTrace& trace = res.trace;
  trace.origin = origin;
  trace.tangent = tangent;

  // n1: line normal oriented away from the slave body interior
  Vec2 nrm(-tangent.y(), tangent.x());
  Vec2 slave_centroid = Vec2::Zero();
  double wsum = 0.0;
  for (int c = 0; c < res.slave.num_cells(); ++c) {
    const auto pts = res.slave.cell_points(c);
    const double a = polygon_signed_area(pts);
    slave_centroid += a * polygon_centroid(pts);
    wsum += a;
  }
  slave_centroid /= wsum;
  if (nrm.dot(slave_centroid - origin) > 0.0) nrm = -nrm;
  trace.n1 = nrm;

  const std::size_t n = fs.nodes.size();
  trace.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ContactTrace::Node& nd = trace.nodes[i];
    nd.slave_vertex = fs.nodes[i].vertex;
    nd.master_vertex = fm.nodes[i].vertex;
    nd.slave_pos = res.slave.vertices[nd.slave_vertex];
    nd.master_pos = res.master.vertices[nd.master_vertex];
    nd.s = fm.nodes[i].s;
    if (std::abs(fs.nodes[i].s - nd.s) > 100 * tol)
      throw std::runtime_error("insert_matching_nodes: node abscissae do not match");
  }
  trace.edges.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    trace.edges[i].slave_edge = fs.span_edge[i];
    trace.edges[i].master_edge = fm.span_edge[i];
    trace.edges[i].slave_cell = fs.span_cell[i];
    trace.edges[i].master_cell = fm.span_cell[i];
  }
  return res;
}

GapFunction GapFunction::zero() { return GapFunction{}; }

GapFunction GapFunction::circular(double R, const Vec2& origin, const Vec2& tangent,
                                  double s_touch) {
  GapFunction g;
  g.kind = Kind::Circular;
  g.R = R;
  g.origin = origin;
  g.tangent = tangent;
  g.s_touch = s_touch;
  return g;
}

GapFunction GapFunction::tabulated(const Vec2& origin, const Vec2& tangent,
                                   std::vector<std::pair<double, double>> table) {
  GapFunction g;
  g.kind = Kind::Tabulated;
  g.origin = origin;
  g.tangent = tangent;
  g.table = std::move(table);
  std::sort(g.table.begin(), g.table.end());
  return g;
}

double GapFunction::at_abscissa(double s) const {
  switch (kind) {
    case Kind::Zero:
      return 0.0;
    case Kind::Circular: {
      const double off = s - s_touch;
      if (std::abs(off) > R)
        throw std::domain_error("gap: abscissa outside the circular support");
      return R - std::sqrt(R * R - off * off);
    }
    case Kind::Tabulated: {
      if (table.empty()) return 0.0;
      if (s <= table.front().first) return table.front().second;
      if (s >= table.back().first) return table.back().second;
      auto it = std::upper_bound(table.begin(), table.end(),
                                 std::make_pair(s, -1.0));
      const auto [s1, g1] = *it;
      const auto [s0, g0] = *(it - 1);
      const double t = (s - s0) / (s1 - s0);
      return g0 + t * (g1 - g0);
    }
  }
  return 0.0;
}

double evaluate_gap(const GapFunction& g, const Vec2& x) {
  const Vec2 nrm(-g.tangent.y(), g.tangent.x());
  const double off = nrm.dot(x - g.origin);
  if (std::abs(off) > 1e-12 * std::max(1.0, x.norm()))
    throw std::invalid_argument("evaluate_gap: point not on the contact line");
  return g.at_abscissa(g.tangent.dot(x - g.origin));
}

std::string trace_to_json(const ContactTrace& trace, const GapFunction& gap) {
  nlohmann::json j;
  j["n1"] = {trace.n1.x(), trace.n1.y()};
  j["tangent"] = {trace.tangent.x(), trace.tangent.y()};
  j["origin"] = {trace.origin.x(), trace.origin.y()};
  auto& nodes = j["nodes"] = nlohmann::json::array();
  for (const auto& n : trace.nodes) {
    nodes.push_back({{"s", n.s},
                     {"slave_vertex", n.slave_vertex},
                     {"master_vertex", n.master_vertex},
                     {"slave", {n.slave_pos.x(), n.slave_pos.y()}},
                     {"master", {n.master_pos.x(), n.master_pos.y()}},
                     {"g0", gap.at_abscissa(n.s)}});
  }
  auto& edges = j["edges"] = nlohmann::json::array();
  for (const auto& e : trace.edges)
    edges.push_back({{"slave_edge", e.slave_edge},
                     {"master_edge", e.master_edge},
                     {"slave_cell", e.slave_cell},
                     {"master_cell", e.master_cell}});
  return j.dump(2);
}

}  // namespace vemc
