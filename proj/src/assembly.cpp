#include "vemc/assembly.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace vemc {

DofNumbering number_dofs(const PolyMesh& m0, const PolyMesh& m1, int k) {
  DofNumbering num;
  num.k = k;
  const PolyMesh* meshes[2] = {&m0, &m1};
  int disp = 0;
  for (int b = 0; b < 2; ++b) {
    auto& body = num.body[b];
    body.nv = meshes[b]->num_vertices();
    body.ne = static_cast<int>(meshes[b]->edges.size());
    body.nc = meshes[b]->num_cells();
    body.vertex_offset = disp;
    disp += 2 * body.nv;
    body.edge_offset = disp;
    disp += (k == 1 ? body.ne : 2 * body.ne);
    body.internal_offset = disp;
    if (k == 2) disp += 2 * body.nc;
  }
  num.n_disp = disp;
  int press = 0;
  for (int b = 0; b < 2; ++b) {
    num.body[b].press_offset = press;
    press += (k == 1 ? 1 : 3) * num.body[b].nc;
  }
  num.n_press = press;
  return num;
}

Eigen::VectorXd GlobalSystem::local_dofs(int body, int cell,
                                         const Eigen::VectorXd& u) const {
  const auto& ids = cell_dofs[body][cell];
  const auto& sgn = cell_signs[body][cell];
  Eigen::VectorXd d(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) d[i] = sgn[i] * u[ids[i]];
  return d;
}

Eigen::VectorXd GlobalSystem::local_pressure(int body, int cell,
                                             const Eigen::VectorXd& p) const {
  const int nq = (k == 1) ? 1 : 3;
  Eigen::VectorXd q(nq);
  for (int j = 0; j < nq; ++j) q[j] = p[num.pdof(body, cell, j)];
  return q;
}

GlobalSystem assemble(const PolyMesh& slave, const PolyMesh& master,
                      const BodyMaterial& mat_slave, const BodyMaterial& mat_master,
                      int k, const BodyField& f, const NeumannField& neumann,
                      StabMode stab) {
  GlobalSystem sys;
  sys.k = k;
  sys.stab = stab;
  sys.mesh[0] = slave;
  sys.mesh[1] = master;
  sys.mat[0] = mat_slave;
  sys.mat[1] = mat_master;
  sys.mesh[0].require_fully_labeled();
  sys.mesh[1].require_fully_labeled();
  sys.num = number_dofs(sys.mesh[0], sys.mesh[1], k);

  std::vector<Eigen::Triplet<double>> ta, tb, tc;
  sys.F = Eigen::VectorXd::Zero(sys.num.n_disp);
  sys.elements.resize(2);
  sys.cell_dofs.resize(2);
  sys.cell_signs.resize(2);

  const EdgeRule neumann_rule = edge_rule(2 * k);

  for (int b = 0; b < 2; ++b) {
    const PolyMesh& mesh = sys.mesh[b];
    const BodyMaterial& mat = sys.mat[b];
    sys.elements[b].reserve(mesh.num_cells());
    sys.cell_dofs[b].resize(mesh.num_cells());
    sys.cell_signs[b].resize(mesh.num_cells());

    for (int c = 0; c < mesh.num_cells(); ++c) {
      LocalElement el = build_local_element(mesh.cell_points(c), k, mat.mu, stab);
      const auto& loop = mesh.cells[c];
      const int nv = static_cast<int>(loop.size());
      std::vector<int>& ids = sys.cell_dofs[b][c];
      std::vector<double>& sgn = sys.cell_signs[b][c];
      ids.assign(el.ndof(), -1);
      sgn.assign(el.ndof(), 1.0);
      for (int i = 0; i < nv; ++i) {
        ids[el.layout.vertex_dof(i, 0)] = sys.num.vdof(b, loop[i], 0);
        ids[el.layout.vertex_dof(i, 1)] = sys.num.vdof(b, loop[i], 1);
      }
      for (int i = 0; i < nv; ++i) {
        const int ge = mesh.cell_edges[c][i];
        if (k == 1) {
          ids[el.layout.edge_dof(i)] = sys.num.edof(b, ge);
          const double dot = el.edge_normal[i].dot(mesh.edge_canonical_normal(ge));
          sgn[el.layout.edge_dof(i)] = (dot > 0.0) ? 1.0 : -1.0;
        } else {
          ids[el.layout.edge_dof(i, 0)] = sys.num.edof(b, ge, 0);
          ids[el.layout.edge_dof(i, 1)] = sys.num.edof(b, ge, 1);
        }
      }
      if (k == 2) {
        ids[el.layout.internal_dof(0)] = sys.num.idof(b, c, 0);
        ids[el.layout.internal_dof(1)] = sys.num.idof(b, c, 1);
      }

      for (int i = 0; i < el.ndof(); ++i)
        for (int j = 0; j < el.ndof(); ++j)
          ta.emplace_back(ids[i], ids[j], sgn[i] * sgn[j] * el.stiffness(i, j));

      const int nq = el.nq();
      for (int q = 0; q < nq; ++q) {
        const int prow = sys.num.pdof(b, c, q);
        for (int i = 0; i < el.ndof(); ++i)
          tb.emplace_back(prow, ids[i], sgn[i] * el.divergence(q, i));
        for (int l = 0; l < nq; ++l)
          tc.emplace_back(prow, sys.num.pdof(b, c, l),
                          el.pressure_mass(q, l) / mat.lambda);
      }

      const Eigen::VectorXd load = local_load(el, [&](const Vec2& x) { return f(b, x); });
      for (int i = 0; i < el.ndof(); ++i) sys.F[ids[i]] += sgn[i] * load[i];

      // Neumann boundary term on the known traces
      for (int i = 0; i < nv; ++i) {
        const int ge = mesh.cell_edges[c][i];
        if (!mesh.edges[ge].boundary() ||
            mesh.edges[ge].label != BoundaryLabel::Neumann)
          continue;
        for (std::size_t g = 0; g < neumann_rule.points.size(); ++g) {
          const double w = el.edge_len[i] * neumann_rule.weights[g];
          const Vec2 x = el.pts[i] + neumann_rule.points[g] *
                                         (el.pts[(i + 1) % nv] - el.pts[i]);
          const Vec2 gv = neumann(b, x, el.edge_normal[i]);
          const Eigen::MatrixXd tf = el.trace_form(i, neumann_rule.points[g]);
          const Eigen::RowVectorXd contrib = w * (gv.x() * tf.row(0) + gv.y() * tf.row(1));
          for (int d = 0; d < el.ndof(); ++d) sys.F[ids[d]] += sgn[d] * contrib[d];
        }
      }
      sys.elements[b].push_back(std::move(el));
    }
  }

  sys.A.resize(sys.num.n_disp, sys.num.n_disp);
  sys.A.setFromTriplets(ta.begin(), ta.end());
  sys.B.resize(sys.num.n_press, sys.num.n_disp);
  sys.B.setFromTriplets(tb.begin(), tb.end());
  sys.C.resize(sys.num.n_press, sys.num.n_press);
  sys.C.setFromTriplets(tc.begin(), tc.end());
  return sys;
}

ReducedSystem apply_dirichlet(const GlobalSystem& sys, const BodyField& u_d,
                              const std::vector<std::pair<int, double>>& extra_pins) {
  const int n = sys.num.n_disp;
  std::vector<signed char> is_dir(n, 0);
  Eigen::VectorXd value = Eigen::VectorXd::Zero(n);

  for (int b = 0; b < 2; ++b) {
    const PolyMesh& mesh = sys.mesh[b];
    for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
      const auto& ed = mesh.edges[e];
      if (!ed.boundary() || ed.label != BoundaryLabel::Dirichlet) continue;
      for (int v : {ed.v0, ed.v1}) {
        const Vec2 uv = u_d(b, mesh.vertices[v]);
        for (int c = 0; c < 2; ++c) {
          is_dir[sys.num.vdof(b, v, c)] = 1;
          value[sys.num.vdof(b, v, c)] = (c == 0) ? uv.x() : uv.y();
        }
      }
      const Vec2 um = u_d(b, mesh.edge_midpoint(static_cast<int>(e)));
      if (sys.k == 1) {
        const int dof = sys.num.edof(b, static_cast<int>(e));
        is_dir[dof] = 1;
        value[dof] = um.dot(mesh.edge_canonical_normal(static_cast<int>(e)));
      } else {
        for (int c = 0; c < 2; ++c) {
          const int dof = sys.num.edof(b, static_cast<int>(e), c);
          is_dir[dof] = 1;
          value[dof] = (c == 0) ? um.x() : um.y();
        }
      }
    }
  }
  for (const auto& [dof, val] : extra_pins) {
    if (dof < 0 || dof >= n) throw std::invalid_argument("apply_dirichlet: pin out of range");
    is_dir[dof] = 1;
    value[dof] = val;
  }

  ReducedSystem red;
  red.free_of_full.assign(n, -1);
  red.dirichlet_full = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (is_dir[i]) {
      red.dirichlet_full[i] = value[i];
    } else {
      red.free_of_full[i] = static_cast<int>(red.full_of_free.size());
      red.full_of_free.push_back(i);
    }
  }
  const int nf = red.n_free();

  std::vector<Eigen::Triplet<double>> ta, tb;
  red.Fu = Eigen::VectorXd::Zero(nf);
  for (int i = 0; i < nf; ++i) red.Fu[i] = sys.F[red.full_of_free[i]];
  for (int col = 0; col < sys.A.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.A, col); it; ++it) {
      const int r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
      if (!is_dir[r] && !is_dir[c])
        ta.emplace_back(red.free_of_full[r], red.free_of_full[c], it.value());
      else if (!is_dir[r] && is_dir[c])
        red.Fu[red.free_of_full[r]] -= it.value() * value[c];
    }
  red.A.resize(nf, nf);
  red.A.setFromTriplets(ta.begin(), ta.end());

  red.Fp = Eigen::VectorXd::Zero(sys.num.n_press);
  for (int col = 0; col < sys.B.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.B, col); it; ++it) {
      const int r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
      if (!is_dir[c])
        tb.emplace_back(r, red.free_of_full[c], it.value());
      else
        red.Fp[r] -= it.value() * value[c];
    }
  red.B.resize(sys.num.n_press, nf);
  red.B.setFromTriplets(tb.begin(), tb.end());
  red.C = sys.C;
  return red;
}

Eigen::VectorXd ReducedSystem::expand(const Eigen::VectorXd& u_free) const {
  Eigen::VectorXd u = dirichlet_full;
  for (int i = 0; i < n_free(); ++i) u[full_of_free[i]] = u_free[i];
  return u;
}

namespace {

// Row of the functional v -> v(at nodal point) . n1 on one side of a trace
// edge, expressed on global displacement DOFs. `which` selects the nodal
// value: 0 endpoint at lower abscissa, 1 midpoint, 2 upper endpoint.
void accumulate_edge_side(std::vector<Eigen::Triplet<double>>& trip, int row,
                          const GlobalSystem& sys, int body, int cell,
                          int mesh_edge, const Vec2& n1, double coeff,
                          const std::array<double, 3>& nodal_weights) {
  const LocalElement& el = sys.elements[body][cell];
  const PolyMesh& mesh = sys.mesh[body];
  const auto& loop = mesh.cells[cell];
  const int nv = static_cast<int>(loop.size());
  int local = -1;
  for (int i = 0; i < nv; ++i)
    if (mesh.cell_edges[cell][i] == mesh_edge) local = i;
  if (local < 0) throw std::logic_error("contact: edge not in its cell");

  const auto& ids = sys.cell_dofs[body][cell];
  const auto& sgn = sys.cell_signs[body][cell];
  // nodal values at xi = 0, 1/2, 1; Simpson-type weights are symmetric so
  // the chain orientation does not matter
  const double xi[3] = {0.0, 0.5, 1.0};
  for (int q = 0; q < 3; ++q) {
    if (nodal_weights[q] == 0.0) continue;
    const Eigen::MatrixXd f = el.trace_form(local, xi[q]);
    const Eigen::RowVectorXd form =
        coeff * nodal_weights[q] * (n1.x() * f.row(0) + n1.y() * f.row(1));
    for (int d = 0; d < el.ndof(); ++d)
      if (form[d] != 0.0) trip.emplace_back(row, ids[d], sgn[d] * form[d]);
  }
}

}  // namespace

ContactConstraints build_contact_constraints(const ContactTrace& trace,
                                             const GlobalSystem& sys,
                                             const GapFunction& gap) {
  ContactConstraints cc;
  const int n_nodes = static_cast<int>(trace.nodes.size());
  const int n_edges = static_cast<int>(trace.edges.size());
  if (n_nodes < 2) throw std::invalid_argument("contact constraints: empty trace");
  const int rows = n_nodes + n_edges;
  cc.g = Eigen::VectorXd::Zero(rows);
  cc.kinds.resize(rows);
  cc.entity.resize(rows);

  std::vector<Eigen::Triplet<double>> trip;
  const Vec2 n1 = trace.n1;

  // vertex rows: (v_slave - v_master)(x_l) . n1 <= g0(x_l)
  for (int l = 0; l < n_nodes; ++l) {
    const auto& nd = trace.nodes[l];
    for (int c = 0; c < 2; ++c) {
      const double nc = (c == 0) ? n1.x() : n1.y();
      trip.emplace_back(l, sys.num.vdof(0, nd.slave_vertex, c), nc);
      trip.emplace_back(l, sys.num.vdof(1, nd.master_vertex, c), -nc);
    }
    cc.g[l] = gap.at_abscissa(nd.s);
    cc.kinds[l] = ContactConstraints::RowKind::Vertex;
    cc.entity[l] = l;
  }

  // edge rows: mean of the quadratic normal jump (Simpson / |e|)
  const EdgeRule grule = edge_rule(5);
  for (int l = 0; l < n_edges; ++l) {
    const int row = n_nodes + l;
    const auto& te = trace.edges[l];
    const std::array<double, 3> wts{1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0};
    accumulate_edge_side(trip, row, sys, 0, te.slave_cell, te.slave_edge, n1, 1.0, wts);
    accumulate_edge_side(trip, row, sys, 1, te.master_cell, te.master_edge, n1, -1.0, wts);
    const double s0 = trace.nodes[l].s, s1 = trace.nodes[l + 1].s;
    double gmean = 0.0;
    for (std::size_t g = 0; g < grule.points.size(); ++g)
      gmean += grule.weights[g] * gap.at_abscissa(s0 + grule.points[g] * (s1 - s0));
    cc.g[row] = gmean;
    cc.kinds[row] = ContactConstraints::RowKind::EdgeMean;
    cc.entity[row] = l;
  }

  cc.G.resize(rows, sys.num.n_disp);
  cc.G.setFromTriplets(trip.begin(), trip.end());
  return cc;
}

void write_matrix_coordinate(const Eigen::SparseMatrix<double>& m,
                             const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  char buf[64];
  os << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << "\n";
  for (int col = 0; col < m.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, col); it; ++it) {
      std::snprintf(buf, sizeof(buf), "%d %d %.17g", static_cast<int>(it.row()),
                    static_cast<int>(it.col()), it.value());
      os << buf << "\n";
    }
}

}  // namespace vemc
