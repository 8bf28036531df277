#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <string>

#include "vemc/contact.hpp"
#include "vemc/element.hpp"
#include "vemc/mesh.hpp"

namespace vemc {

struct BodyMaterial {
  double mu = 1.0;
  double lambda = 1.0;
  static BodyMaterial from_young_poisson(double E, double nu) {
    // plane strain
    return {E / (2.0 * (1.0 + nu)), E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))};
  }
};

/// Global numbering: the two bodies carry independent displacement and
/// pressure indices (no shared DOFs across the contact interface).
struct DofNumbering {
  int k = 1;
  struct Body {
    int vertex_offset = 0, edge_offset = 0, internal_offset = 0, press_offset = 0;
    int nv = 0, ne = 0, nc = 0;
  };
  Body body[2];
  int n_disp = 0, n_press = 0;

  int vdof(int b, int v, int c) const { return body[b].vertex_offset + 2 * v + c; }
  int edof(int b, int e) const { return body[b].edge_offset + e; }          // k=1
  int edof(int b, int e, int c) const { return body[b].edge_offset + 2 * e + c; }  // k=2
  int idof(int b, int cell, int j) const { return body[b].internal_offset + 2 * cell + j; }
  int pdof(int b, int cell, int j) const {
    return body[b].press_offset + (k == 1 ? cell : 3 * cell + j);
  }
};

DofNumbering number_dofs(const PolyMesh& m0, const PolyMesh& m1, int k);

using BodyField = std::function<Vec2(int body, const Vec2&)>;
/// Traction data: body, point, outward unit normal -> traction vector.
using NeumannField = std::function<Vec2(int body, const Vec2&, const Vec2&)>;

/// Assembled saddle-point system A u + B^T p = F, B u - C p = 0 before
/// Dirichlet elimination. C carries the 1/lambda^i scaling.
struct GlobalSystem {
  int k = 1;
  StabMode stab = StabMode::Scaled;
  PolyMesh mesh[2];  // slave first
  BodyMaterial mat[2];
  DofNumbering num;

  Eigen::SparseMatrix<double> A;  // n_disp x n_disp, symmetric
  Eigen::SparseMatrix<double> B;  // n_press x n_disp
  Eigen::SparseMatrix<double> C;  // n_press x n_press, SPD
  Eigen::VectorXd F;

  std::vector<std::vector<LocalElement>> elements;       // [body][cell]
  std::vector<std::vector<std::vector<int>>> cell_dofs;  // [body][cell][local]
  std::vector<std::vector<std::vector<double>>> cell_signs;

  /// Local displacement DOF vector of one cell extracted from a global vector.
  Eigen::VectorXd local_dofs(int body, int cell, const Eigen::VectorXd& u) const;
  /// Local pressure coefficients of one cell.
  Eigen::VectorXd local_pressure(int body, int cell, const Eigen::VectorXd& p) const;
};

GlobalSystem assemble(const PolyMesh& slave, const PolyMesh& master,
                      const BodyMaterial& mat_slave, const BodyMaterial& mat_master,
                      int k, const BodyField& f, const NeumannField& neumann,
                      StabMode stab = StabMode::Scaled);

/// Dirichlet-eliminated system. Non-homogeneous data is lifted into the
/// right-hand sides of both equations.
struct ReducedSystem {
  Eigen::SparseMatrix<double> A;  // free x free
  Eigen::SparseMatrix<double> B;  // press x free
  Eigen::SparseMatrix<double> C;
  Eigen::VectorXd Fu, Fp;
  std::vector<int> full_of_free;
  std::vector<int> free_of_full;  // -1 for eliminated dofs
  Eigen::VectorXd dirichlet_full; // full size; values on eliminated dofs

  int n_free() const { return static_cast<int>(full_of_free.size()); }
  /// Scatter a reduced displacement vector back to full numbering.
  Eigen::VectorXd expand(const Eigen::VectorXd& u_free) const;
};

/// Pin displacement DOFs on Dirichlet-labelled edges to the given field.
/// `extra_pins` adds individual (dof, value) constraints (e.g. symmetry axes).
ReducedSystem apply_dirichlet(const GlobalSystem& sys, const BodyField& u_d,
                              const std::vector<std::pair<int, double>>& extra_pins = {});

/// Contact constraint system G u <= g realizing K_h: one row per contact
/// vertex (pointwise gap) and one per contact edge (mean gap; rows scaled
/// by 1/|e| so all rows share displacement units).
struct ContactConstraints {
  Eigen::SparseMatrix<double> G;  // rows x n_disp (full numbering)
  Eigen::VectorXd g;
  enum class RowKind { Vertex, EdgeMean };
  std::vector<RowKind> kinds;
  std::vector<int> entity;  // node index l or edge index l on the trace
  int rows() const { return static_cast<int>(g.size()); }
};

ContactConstraints build_contact_constraints(const ContactTrace& trace,
                                             const GlobalSystem& sys,
                                             const GapFunction& gap);

/// Coordinate text export (row col value per line, 17 digits).
void write_matrix_coordinate(const Eigen::SparseMatrix<double>& m,
                             const std::string& path);

}  // namespace vemc
