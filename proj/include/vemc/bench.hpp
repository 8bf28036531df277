#pragma once

#include <optional>
#include <string>

#include "vemc/mesh_gen.hpp"
#include "vemc/solver.hpp"

namespace vemc {

/// Closed-form two-body solution with all derived data (loads, tractions)
/// needed to pose the problem and to measure errors.
struct ManufacturedSolution {
  std::function<Vec2(int, const Vec2&)> u;
  std::function<Eigen::Matrix2d(int, const Vec2&)> grad_u;
  std::function<double(int, const Vec2&)> div_u;
  std::function<double(int, const Vec2&)> p;
  std::function<Vec2(int, const Vec2&)> f;
  /// Full mixed stress sigma = 2 mu eps(u) + p I.
  std::function<Eigen::Matrix2d(int, const Vec2&)> stress;
  BodyMaterial mat[2];
};

/// Contact patch test: u^i = (0, -(y+1))/lambda, p^i = -1 (both bodies).
ManufacturedSolution patch_solution(double lambda);

/// Divergence-free trigonometric solution u = (pi x cos(pi y), -sin(pi y)),
/// p = 0, mu = 1.
ManufacturedSolution trig_solution(double lambda);

/// Verify f and the tractions against (u, p) by central differences at
/// sample points; returns the max mismatch (relative).
double manufactured_consistency(const ManufacturedSolution& ms, int samples,
                                std::uint64_t seed);

enum class MeshFamily { Q, H, W };
enum class ContactConfig { IM, SE };

MeshFamily family_from_string(const std::string& s);
std::string family_name(MeshFamily f);

/// Cell counts of the paper's four refinement levels for one family.
std::vector<int> family_levels(MeshFamily f);

struct CaseResult {
  double h = 0.0;
  int ndof_u = 0, ndof_p = 0;
  double delta_u = 0.0, delta_p = 0.0;
  int iterations = 0;
  double log_factor = 0.0;
  KktReport kkt;
  double pressure_relation = 0.0;
};

struct AnalyticCase {
  MeshFamily family = MeshFamily::Q;
  int cells = 4;  // per body
  int k = 1;
  double lambda = 10.0;
  ContactConfig config = ContactConfig::IM;
  StabMode stab = StabMode::Scaled;
  std::uint64_t seed = 7;
  UzawaConfig solver;
};

struct CaseArtifacts {
  CaseResult result;
  GlobalSystem system;
  ContactSolution solution;
  ContactTrace trace;
};

/// Run one two-square analytic case (patch or trig data) end to end.
CaseArtifacts run_analytic_case(const AnalyticCase& c, const ManufacturedSolution& ms);

/// Broken H1 seminorm of u - Pi u_h and L2 norm of p - p_h.
std::pair<double, double> error_norms(const GlobalSystem& sys,
                                      const ContactSolution& sol,
                                      const ManufacturedSolution& ms);

struct ConvergenceReport {
  std::vector<CaseResult> rows;  // ordered by decreasing h
  double slope_u = 0.0, slope_p = 0.0;
};

/// Least-squares slope on log-log data; refuses to fit fewer than 3 levels.
double fit_rate(const std::vector<double>& h, const std::vector<double>& err);

ConvergenceReport run_convergence(MeshFamily family, int k, double lambda,
                                  ContactConfig config, const ManufacturedSolution& ms,
                                  StabMode stab = StabMode::Scaled,
                                  std::uint64_t seed = 7, int skip_levels = 0,
                                  int jobs = 1);

/// Hertz reference: effective modulus, half-width and pressure profile.
struct HertzSpec {
  double R = 0.5;
  double L = 1.0;
  double pressure = 2.5;
  double E_square = 70000.0, nu_square = 0.4999;
  double E_disk = 70.0, nu_disk = 0.3;
};

struct HertzReference {
  double E_star = 0.0;
  double b = 0.0;
  double p_max = 0.0;  // magnitude 4Rp/(pi b)
  double p_n(double x) const;  // profile magnitude, 0 outside |x|<=b
};

HertzReference hertz_reference(const HertzSpec& spec);

struct HertzResult {
  int disk_cells = 0;
  double p_max = 0.0;       // recovered magnitude
  double half_width = 0.0;  // threshold-crossing estimate
  std::vector<double> x;          // contact vertex abscissae (centred)
  std::vector<double> sigma_n;    // recovered normal stress (signed)
  std::vector<double> p_exact;    // reference magnitude at x
  int iterations = 0;
  double log_factor = 0.0;
};

/// Nodal normal stress on the contact zone: mean over slave cells adjacent
/// to each contact vertex of (2 mu eps(Pi u_h) + p_h I) n . n.
std::vector<double> recover_contact_pressure(const GlobalSystem& sys,
                                             const ContactSolution& sol,
                                             const ContactTrace& trace);

HertzResult run_hertz(const HertzSpec& spec, int disk_cells, int k,
                      const UzawaConfig& solver = {}, StabMode stab = StabMode::Scaled);

}  // namespace vemc
