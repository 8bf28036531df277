#include "vemc/solver.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

namespace vemc {

namespace {

// Constraint matrix restricted to free displacement columns; Dirichlet
// columns shift the right-hand side.
void reduce_constraints(const ContactConstraints& cc, const ReducedSystem& red,
                        Eigen::SparseMatrix<double>& G_red, Eigen::VectorXd& g_red) {
  std::vector<Eigen::Triplet<double>> trip;
  g_red = cc.g;
  for (int col = 0; col < cc.G.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(cc.G, col); it; ++it) {
      const int c = static_cast<int>(it.col());
      if (red.free_of_full[c] >= 0)
        trip.emplace_back(static_cast<int>(it.row()), red.free_of_full[c], it.value());
      else
        g_red[it.row()] -= it.value() * red.dirichlet_full[c];
    }
  G_red.resize(cc.rows(), red.n_free());
  G_red.setFromTriplets(trip.begin(), trip.end());
}

}  // namespace

ContactSolution uzawa_solve(const ReducedSystem& red, const ContactConstraints& cc,
                            const GlobalSystem& sys, const UzawaConfig& cfg) {
  const int nf = red.n_free();
  const int np = static_cast<int>(red.C.rows());
  const int nrows = cc.rows();

  for (int r : cfg.equality_rows)
    if (r < 0 || r >= nrows)
      throw std::invalid_argument("uzawa: equality row out of range");
  std::vector<char> is_eq(std::max(nrows, 1), 0);
  for (int r : cfg.equality_rows) is_eq[r] = 1;
  std::vector<int> free_rows, eq_rows;
  for (int r = 0; r < nrows; ++r) (is_eq[r] ? eq_rows : free_rows).push_back(r);
  const int neq = static_cast<int>(eq_rows.size());
  const int nfr = static_cast<int>(free_rows.size());

  Eigen::SparseMatrix<double> G_red;
  Eigen::VectorXd g_red;
  if (nrows > 0) {
    reduce_constraints(cc, red, G_red, g_red);
  } else {
    G_red.resize(0, nf);
    g_red.resize(0);
  }

  // split rows
  auto take_rows = [&](const std::vector<int>& rows) {
    Eigen::SparseMatrix<double> m(static_cast<int>(rows.size()), nf);
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<int> inv(std::max(nrows, 1), -1);
    for (std::size_t i = 0; i < rows.size(); ++i) inv[rows[i]] = static_cast<int>(i);
    for (int col = 0; col < G_red.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(G_red, col); it; ++it)
        if (inv[it.row()] >= 0)
          trip.emplace_back(inv[it.row()], static_cast<int>(it.col()), it.value());
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
  };
  const Eigen::SparseMatrix<double> Gf = take_rows(free_rows);
  const Eigen::SparseMatrix<double> Ge = take_rows(eq_rows);
  Eigen::VectorXd gf(nfr), ge(neq);
  for (int i = 0; i < nfr; ++i) gf[i] = g_red[free_rows[i]];
  for (int i = 0; i < neq; ++i) ge[i] = g_red[eq_rows[i]];

  // saddle matrix [[A, B', Ge'], [B, -C, 0], [Ge, 0, 0]]
  const int n = nf + np + neq;
  std::vector<Eigen::Triplet<double>> trip;
  for (int col = 0; col < red.A.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(red.A, col); it; ++it)
      trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int col = 0; col < red.B.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(red.B, col); it; ++it) {
      trip.emplace_back(nf + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
      trip.emplace_back(static_cast<int>(it.col()), nf + static_cast<int>(it.row()), it.value());
    }
  for (int col = 0; col < red.C.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(red.C, col); it; ++it)
      trip.emplace_back(nf + static_cast<int>(it.row()), nf + static_cast<int>(it.col()),
                        -it.value());
  for (int col = 0; col < Ge.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(Ge, col); it; ++it) {
      trip.emplace_back(nf + np + static_cast<int>(it.row()), static_cast<int>(it.col()),
                        it.value());
      trip.emplace_back(static_cast<int>(it.col()), nf + np + static_cast<int>(it.row()),
                        it.value());
    }
  Eigen::SparseMatrix<double> S(n, n);
  S.setFromTriplets(trip.begin(), trip.end());
  S.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(S);
  lu.factorize(S);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("uzawa: singular saddle factorization");

  auto solve_saddle = [&](const Eigen::VectorXd& yf, Eigen::VectorXd& u,
                          Eigen::VectorXd& p, Eigen::VectorXd& ye) {
    Eigen::VectorXd rhs(n);
    rhs.head(nf) = red.Fu;
    if (nfr > 0) rhs.head(nf) -= Gf.transpose() * yf;
    rhs.segment(nf, np) = red.Fp;
    rhs.tail(neq) = ge;
    const Eigen::VectorXd x = lu.solve(rhs);
    u = x.head(nf);
    p = x.segment(nf, np);
    ye = x.tail(neq);
  };

  ContactSolution sol;
  Eigen::VectorXd yf = Eigen::VectorXd::Zero(nfr);
  Eigen::VectorXd u, p, ye;

  if (nfr == 0) {
    solve_saddle(yf, u, p, ye);
    sol.iterations = 1;
    sol.converged = true;
  } else {
    // auto step: rho = 1 / lambda_max(Gf S^-1 Gf') by power iteration
    double rho = cfg.rho;
    if (rho <= 0.0) {
      std::mt19937_64 rng(cfg.seed);
      std::normal_distribution<double> gauss;
      Eigen::VectorXd w(nfr);
      for (int i = 0; i < nfr; ++i) w[i] = gauss(rng);
      w.normalize();
      double lambda_max = 0.0;
      Eigen::VectorXd rhs2(n), uu;
      for (int it = 0; it < 25; ++it) {
        rhs2.setZero();
        rhs2.head(nf) = Gf.transpose() * w;
        const Eigen::VectorXd x = lu.solve(rhs2);
        Eigen::VectorXd z = Gf * x.head(nf);
        const double nz = z.norm();
        if (nz <= 0.0) break;
        lambda_max = w.dot(z);
        w = z / nz;
      }
      // projected ascent is stable for rho < 2 / lambda_max
      rho = (lambda_max > 0.0) ? 1.5 / lambda_max : 1.0;
    }
    sol.rho_used = rho;

    std::ofstream log;
    if (!cfg.iteration_log_path.empty()) {
      log.open(cfg.iteration_log_path);
      log << "iter,primal,dual,complementarity\n";
    }

    Eigen::VectorXd prev_dy = Eigen::VectorXd::Zero(nfr);
    int oscillating_streak = 0;
    bool have_prev_dy = false;

    for (int it = 1; it <= cfg.max_iterations; ++it) {
      solve_saddle(yf, u, p, ye);
      const Eigen::VectorXd r = Gf * u - gf;
      Eigen::VectorXd ynew = (yf + rho * r).cwiseMax(0.0);
      const Eigen::VectorXd dy = ynew - yf;
      const double dy_norm = dy.lpNorm<Eigen::Infinity>();
      const double y_scale = std::max(1.0, yf.lpNorm<Eigen::Infinity>());
      const double primal = r.maxCoeff();
      const double u_scale = std::max(1.0, u.lpNorm<Eigen::Infinity>());
      sol.residual_history.push_back(dy_norm);
      if (log.is_open())
        log << it << ',' << primal << ',' << ynew.minCoeff() << ','
            << std::abs(ynew.dot(r)) << "\n";

      sol.iterations = it;
      if (dy_norm <= cfg.tol * y_scale && primal <= cfg.tol * u_scale) {
        yf = ynew;
        sol.converged = true;
        break;
      }

      // oscillation safeguard: halve the step when most active multipliers
      // keep flipping their update direction
      if (have_prev_dy) {
        int flips = 0, active = 0;
        for (int i = 0; i < nfr; ++i) {
          if (ynew[i] > 0.0 || yf[i] > 0.0) {
            ++active;
            if (dy[i] * prev_dy[i] < 0.0) ++flips;
          }
        }
        if (active > 0 && flips * 2 > active)
          ++oscillating_streak;
        else
          oscillating_streak = 0;
        if (oscillating_streak >= 5) {
          rho *= 0.5;
          sol.rho_used = rho;
          oscillating_streak = 0;
        }
      }
      if (!yf.allFinite() || yf.lpNorm<Eigen::Infinity>() > 1e30) {
        rho *= 0.5;
        sol.rho_used = rho;
        yf.setZero();
        have_prev_dy = false;
        continue;
      }
      prev_dy = dy;
      have_prev_dy = true;
      yf = ynew;
    }
    if (!sol.converged) {
      const double last_dy =
          sol.residual_history.empty() ? 0.0 : sol.residual_history.back();
      solve_saddle(yf, u, p, ye);
      const double primal = nfr > 0 ? (Gf * u - gf).maxCoeff() : 0.0;
      throw SolverNonConvergence("uzawa: no convergence after " +
                                     std::to_string(cfg.max_iterations) +
                                     " iterations",
                                 last_dy, primal);
    }
    solve_saddle(yf, u, p, ye);
  }

  sol.u = red.expand(u);
  sol.p = p;
  sol.y = Eigen::VectorXd::Zero(nrows);
  for (int i = 0; i < nfr; ++i) sol.y[free_rows[i]] = yf[i];
  for (int i = 0; i < neq; ++i) sol.y[eq_rows[i]] = ye[i];
  sol.kkt = kkt_report(sol, red, cc, sys);
  return sol;
}

KktReport kkt_report(const ContactSolution& sol, const ReducedSystem& red,
                     const ContactConstraints& cc, const GlobalSystem& sys) {
  KktReport k;
  if (cc.rows() > 0) {
    const Eigen::VectorXd r = cc.G * sol.u - cc.g;
    k.primal = r.maxCoeff();
    k.dual = sol.y.minCoeff();
    k.complementarity = std::abs(sol.y.dot(r));
  }
  Eigen::VectorXd uf(red.n_free());
  for (int i = 0; i < red.n_free(); ++i) uf[i] = sol.u[red.full_of_free[i]];
  k.energy = 0.5 * uf.dot(red.A * uf) + 0.5 * sol.p.dot(red.C * sol.p) -
             red.Fu.dot(uf);
  (void)sys;
  return k;
}

double pressure_relation_residual(const GlobalSystem& sys, const ContactSolution& sol) {
  // Per-cell residual of C_lambda p = B u in backward-error form: the
  // normalization uses the term magnitudes before cancellation, so the
  // measure stays meaningful when lambda amplifies the identity
  // p = lambda Pi0 div u far beyond machine precision.
  double worst = 0.0;
  for (int b = 0; b < 2; ++b) {
    const double lambda = sys.mat[b].lambda;
    for (int c = 0; c < sys.mesh[b].num_cells(); ++c) {
      const LocalElement& el = sys.elements[b][c];
      const Eigen::VectorXd d = sys.local_dofs(b, c, sol.u);
      const Eigen::VectorXd pc = sys.local_pressure(b, c, sol.p);
      const Eigen::VectorXd lhs = el.pressure_mass * pc;
      const Eigen::VectorXd rhs = lambda * (el.divergence * d);
      const double term_scale =
          el.pressure_mass.cwiseAbs().rowwise().sum().maxCoeff() *
              pc.lpNorm<Eigen::Infinity>() +
          lambda * el.divergence.cwiseAbs().rowwise().sum().maxCoeff() *
              d.lpNorm<Eigen::Infinity>();
      if (term_scale <= 0.0) continue;
      worst = std::max(worst, (lhs - rhs).lpNorm<Eigen::Infinity>() / term_scale);
    }
  }
  return worst;
}

}  // namespace vemc
