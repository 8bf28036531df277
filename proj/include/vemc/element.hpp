#pragma once

#include <functional>
#include <string>
#include <vector>

#include "vemc/quadrature.hpp"

namespace vemc {

enum class StabMode { Scaled, Literal };

/// Local DOF layout of the Stokes-like displacement element.
/// k=1: two components per vertex plus one normal value per edge midpoint.
/// k=2: two components per vertex and per edge midpoint plus two internal
/// moments of the divergence. Pressure: 1 moment (k=1) or 3 (k=2).
struct DofLayout {
  int k = 1;
  int nv = 0;  // vertices == edges for a polygon
  int n_disp = 0;
  int n_press = 0;

  int vertex_dof(int i, int comp) const { return 2 * i + comp; }
  int edge_dof(int i) const { return 2 * nv + i; }                 // k=1
  int edge_dof(int i, int comp) const { return 2 * nv + 2 * i + comp; }  // k=2
  int internal_dof(int j) const { return 4 * nv + j; }             // k=2, j=0,1
};

DofLayout dof_layout(int nv, int k);

/// All per-cell VEM artifacts. Matrices act on the local DOF vector; the
/// projector maps DOFs to coefficients over the interleaved vector monomial
/// basis {(m_a,0),(0,m_a)} of [P_k]^2 with scaled monomials m_a.
struct LocalElement {
  DofLayout layout;
  double mu = 1.0;
  StabMode stab_mode = StabMode::Scaled;

  std::vector<Vec2> pts;  // CCW vertex positions
  double area = 0.0, hK = 0.0, perimeter = 0.0;
  Vec2 centroid = Vec2::Zero();

  int np = 0;   // # vector monomials: 6 (k=1) or 12 (k=2)
  int nm1 = 0;  // # scalar monomials of degree k-1: 1 or 3

  Eigen::MatrixXd proj;          // np x ndof   energy projector
  Eigen::MatrixXd dof_of_poly;   // ndof x np   DOFs of the monomial basis
  Eigen::MatrixXd G;             // np x np     a^K on polynomials
  Eigen::MatrixXd consistency;   // ndof x ndof a^K(Pi.,Pi.)
  Eigen::MatrixXd stab;          // ndof x ndof S^K on (I-Pi)
  Eigen::MatrixXd stiffness;     // ndof x ndof A_h^K
  Eigen::MatrixXd div_map;       // nm1 x ndof  DOFs -> coefficients of div v
  Eigen::MatrixXd divergence;    // nq x ndof   B^K: b(phi_i, m_j)
  Eigen::MatrixXd pressure_mass; // nq x nq     C^K (no 1/lambda here)
  Eigen::MatrixXd first_moment;  // 2 x ndof    \int_K phi_i . e_d

  MomentTable moments;
  std::vector<Eigen::MatrixXd> edge_trace;  // 6 x ndof nodal values per edge
  std::vector<double> edge_len;
  std::vector<Vec2> edge_normal;   // outward
  std::vector<Vec2> edge_tangent;  // CCW direction
  std::vector<Vec2> edge_mid;

  int ndof() const { return layout.n_disp; }
  int nq() const { return layout.n_press; }

  /// Trace value at parameter xi in [0,1] on local edge i.
  Vec2 trace_value(int edge, double xi, const Eigen::VectorXd& dofs) const;
  /// (vx, vy) at parameter xi as linear forms in the DOFs (2 x ndof).
  Eigen::MatrixXd trace_form(int edge, double xi) const;

  /// Value / gradient of a [P_k]^2 polynomial given its coefficient vector.
  Vec2 poly_value(const Eigen::VectorXd& coeffs, const Vec2& x) const;
  Eigen::Matrix2d poly_grad(const Eigen::VectorXd& coeffs, const Vec2& x) const;

  Eigen::VectorXd project(const Eigen::VectorXd& dofs) const { return proj * dofs; }
};

/// Build every local matrix for one cell. Throws element-construction errors
/// for degenerate cells (area < 1e-14 h^2) or singular projector systems.
LocalElement build_local_element(const std::vector<Vec2>& cell_pts, int k,
                                 double mu, StabMode mode = StabMode::Scaled);

/// DOF vector of an analytic displacement field (its divergence is needed
/// for the k=2 internal moments; pass nullptr when k=1).
Eigen::VectorXd dofs_of_function(
    const LocalElement& el, const std::function<Vec2(const Vec2&)>& u,
    const std::function<double(const Vec2&)>& div_u);

/// Load vector for volume density f: uses the piecewise-constant projection
/// of f and the computable first moments of the basis functions.
Eigen::VectorXd local_load(const LocalElement& el,
                           const std::function<Vec2(const Vec2&)>& f);

/// Row-major debug dump of the per-cell matrices (17 digits).
std::string element_to_json(const LocalElement& el);

}  // namespace vemc
