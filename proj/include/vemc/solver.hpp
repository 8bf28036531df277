#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "vemc/assembly.hpp"

namespace vemc {

/// Thrown when the multiplier iteration hits its iteration cap; carries the
/// last residuals for diagnostics.
struct SolverNonConvergence : std::runtime_error {
  double last_dy;
  double last_primal;
  SolverNonConvergence(const std::string& msg, double dy, double primal)
      : std::runtime_error(msg), last_dy(dy), last_primal(primal) {}
};

struct UzawaConfig {
  double rho = 0.0;       // step size; 0 = auto (spectral estimate)
  double tol = 1e-12;
  int max_iterations = 100000;
  std::uint64_t seed = 20240901;  // power-iteration start vector
  /// Constraint rows enforced as equalities inside the factorization.
  /// Needed when contact is what anchors a floating rigid mode (Hertz disk):
  /// their multipliers come out of the direct solve and must be >= 0.
  std::vector<int> equality_rows;
  std::string iteration_log_path;  // optional CSV: iter, primal, dual, compl
};

struct KktReport {
  double primal = 0.0;           // max(Gu - g)
  double dual = 0.0;             // min multiplier
  double complementarity = 0.0;  // |y^T (Gu - g)|
  double energy = 0.0;           // 1/2 u'Au + 1/2 p'Cp - F'u on the reduced space
};

struct ContactSolution {
  Eigen::VectorXd u;  // full displacement vector (Dirichlet values included)
  Eigen::VectorXd p;  // pressure coefficients
  Eigen::VectorXd y;  // one multiplier per constraint row
  int iterations = 0;
  bool converged = false;
  double rho_used = 0.0;
  std::vector<double> residual_history;
  KktReport kkt;
};

/// Projected multiplier ascent on the dual of the discrete variational
/// inequality. The (u, p) saddle system is factorized once and re-solved
/// with a new right-hand side every iteration:
///   A u + B^T p = F - G^T y,   B u - C p = Fp,
///   y <- max(0, y + rho (G u - g)).
ContactSolution uzawa_solve(const ReducedSystem& red, const ContactConstraints& cc,
                            const GlobalSystem& sys, const UzawaConfig& cfg = {});

KktReport kkt_report(const ContactSolution& sol, const ReducedSystem& red,
                     const ContactConstraints& cc, const GlobalSystem& sys);

/// Max relative residual of the per-cell pressure relation
/// p = lambda * Pi0_{k-1} div u_h (second equation of the saddle system).
double pressure_relation_residual(const GlobalSystem& sys, const ContactSolution& sol);

}  // namespace vemc
