#include "vemc/bench.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>
#include <stdexcept>

namespace vemc {

namespace {

ManufacturedSolution make_solution(double lambda,
                                   std::function<Vec2(const Vec2&)> u,
                                   std::function<Eigen::Matrix2d(const Vec2&)> grad,
                                   std::function<double(const Vec2&)> div,
                                   std::function<double(const Vec2&)> p,
                                   std::function<Vec2(const Vec2&)> f) {
  ManufacturedSolution ms;
  ms.mat[0] = {1.0, lambda};
  ms.mat[1] = {1.0, lambda};
  ms.u = [u](int, const Vec2& x) { return u(x); };
  ms.grad_u = [grad](int, const Vec2& x) { return grad(x); };
  ms.div_u = [div](int, const Vec2& x) { return div(x); };
  ms.p = [p](int, const Vec2& x) { return p(x); };
  ms.f = [f](int, const Vec2& x) { return f(x); };
  ms.stress = [grad, p, ms](int b, const Vec2& x) {
    const Eigen::Matrix2d g = grad(x);
    const Eigen::Matrix2d eps = 0.5 * (g + g.transpose());
    return Eigen::Matrix2d(2.0 * ms.mat[b].mu * eps +
                           p(x) * Eigen::Matrix2d::Identity());
  };
  return ms;
}

}  // namespace

ManufacturedSolution patch_solution(double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("patch_solution: lambda > 0 required");
  auto u = [lambda](const Vec2& x) { return Vec2(0.0, -(x.y() + 1.0) / lambda); };
  auto grad = [lambda](const Vec2&) {
    Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
    g(1, 1) = -1.0 / lambda;
    return g;
  };
  auto div = [lambda](const Vec2&) { return -1.0 / lambda; };
  auto p = [](const Vec2&) { return -1.0; };
  auto f = [](const Vec2&) { return Vec2::Zero().eval(); };
  return make_solution(lambda, u, grad, div, p, f);
}

ManufacturedSolution trig_solution(double lambda) {
  const double pi = M_PI;
  auto u = [pi](const Vec2& x) {
    return Vec2(pi * x.x() * std::cos(pi * x.y()), -std::sin(pi * x.y()));
  };
  auto grad = [pi](const Vec2& x) {
    Eigen::Matrix2d g;
    g(0, 0) = pi * std::cos(pi * x.y());
    g(0, 1) = -pi * pi * x.x() * std::sin(pi * x.y());
    g(1, 0) = 0.0;
    g(1, 1) = -pi * std::cos(pi * x.y());
    return g;
  };
  auto div = [](const Vec2&) { return 0.0; };
  auto p = [](const Vec2&) { return 0.0; };
  auto f = [pi](const Vec2& x) {
    return Vec2(pi * pi * pi * x.x() * std::cos(pi * x.y()),
                -pi * pi * std::sin(pi * x.y()));
  };
  return make_solution(lambda, u, grad, div, p, f);
}

double manufactured_consistency(const ManufacturedSolution& ms, int samples,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.05, 0.95);
  const double eps = 1e-6;
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const int b = s % 2;
    const Vec2 x(ux(rng), b == 0 ? -ux(rng) : ux(rng));
    // f = -div sigma by central differences of the stress columns
    Vec2 divs = Vec2::Zero();
    for (int j = 0; j < 2; ++j) {
      Vec2 dx = Vec2::Zero();
      dx[j] = eps;
      const Eigen::Matrix2d sp = ms.stress(b, x + dx);
      const Eigen::Matrix2d sm = ms.stress(b, x - dx);
      divs.x() += (sp(0, j) - sm(0, j)) / (2 * eps);
      divs.y() += (sp(1, j) - sm(1, j)) / (2 * eps);
    }
    const Vec2 fv = ms.f(b, x);
    const double scale = std::max(1.0, fv.norm());
    worst = std::max(worst, (fv + divs).norm() / scale);
    // p = lambda div u and grad consistency
    worst = std::max(worst, std::abs(ms.p(b, x) - ms.mat[b].lambda * ms.div_u(b, x)) /
                                std::max(1.0, std::abs(ms.p(b, x))));
    const Eigen::Matrix2d g = ms.grad_u(b, x);
    for (int j = 0; j < 2; ++j) {
      Vec2 dx = Vec2::Zero();
      dx[j] = eps;
      const Vec2 du = (ms.u(b, x + dx) - ms.u(b, x - dx)) / (2 * eps);
      worst = std::max(worst, (du - Vec2(g(0, j), g(1, j))).norm() /
                                  std::max(1.0, du.norm()));
    }
  }
  return worst;
}

MeshFamily family_from_string(const std::string& s) {
  if (s == "Q" || s == "q") return MeshFamily::Q;
  if (s == "H" || s == "h") return MeshFamily::H;
  if (s == "W" || s == "w") return MeshFamily::W;
  throw std::invalid_argument("unknown mesh family '" + s + "'");
}

std::string family_name(MeshFamily f) {
  switch (f) {
    case MeshFamily::Q: return "Q";
    case MeshFamily::H: return "H";
    default: return "W";
  }
}

std::vector<int> family_levels(MeshFamily f) {
  if (f == MeshFamily::W) return {8, 32, 128, 512};
  return {4, 16, 64, 256};
}

namespace {

PolyMesh canonical_family_mesh(MeshFamily family, int cells, std::uint64_t seed) {
  const Rect unit{0.0, 0.0, 1.0, 1.0};
  switch (family) {
    case MeshFamily::Q: {
      const int n = static_cast<int>(std::lround(std::sqrt(double(cells))));
      if (n * n != cells)
        throw std::invalid_argument("Q family: cell count must be a square");
      return build_square_mesh(unit, n);
    }
    case MeshFamily::H:
      return build_hexagonal_mesh(unit, cells);
    default:
      return build_web_mesh(unit, cells, seed);
  }
}

void label_two_square_body(PolyMesh& mesh, double y_dirichlet) {
  const double tol = 1e-9;
  mesh.label_boundary([tol](const Vec2& x) { return std::abs(x.y()) < tol; },
                      BoundaryLabel::Contact);
  mesh.label_boundary(
      [tol, y_dirichlet](const Vec2& x) { return std::abs(x.y() - y_dirichlet) < tol; },
      BoundaryLabel::Dirichlet);
  mesh.label_boundary(
      [tol](const Vec2& x) {
        return std::abs(x.x()) < tol || std::abs(x.x() - 1.0) < tol;
      },
      BoundaryLabel::Neumann);
  mesh.require_fully_labeled();
}

}  // namespace

CaseArtifacts run_analytic_case(const AnalyticCase& c, const ManufacturedSolution& ms) {
  // Omega^2 = (0,1)x(0,1) is the canonical mesh; Omega^1 its mirror image,
  // so the contact nodes match in the I.M. configuration.
  PolyMesh master = canonical_family_mesh(c.family, c.cells, c.seed);
  master.body_id = 2;
  PolyMesh slave = mirror_y(master);
  slave.body_id = 1;
  label_two_square_body(master, 1.0);
  label_two_square_body(slave, -1.0);
  if (c.config == ContactConfig::SE)
    slave = perturb_contact_band(slave, 0.01, 0.02, c.seed + 1);

  InsertionResult ins = insert_matching_nodes(slave, master);

  const NeumannField neumann = [&ms](int b, const Vec2& x, const Vec2& n) {
    return Vec2(ms.stress(b, x) * n);
  };
  GlobalSystem sys = assemble(ins.slave, ins.master, ms.mat[0], ms.mat[1], c.k,
                              ms.f, neumann, c.stab);
  const ReducedSystem red = apply_dirichlet(sys, ms.u);
  const ContactConstraints cc =
      build_contact_constraints(ins.trace, sys, GapFunction::zero());

  UzawaConfig ucfg = c.solver;
  ContactSolution sol = uzawa_solve(red, cc, sys, ucfg);

  CaseArtifacts art{.result = {}, .system = std::move(sys), .solution = std::move(sol),
                    .trace = ins.trace};
  const MeshQualityReport q = quality_report(ins.slave, ins.master);
  art.result.h = q.h;
  art.result.log_factor = q.log_factor;
  art.result.ndof_u = red.n_free();
  art.result.ndof_p = static_cast<int>(red.C.rows());
  art.result.iterations = art.solution.iterations;
  art.result.kkt = art.solution.kkt;
  art.result.pressure_relation = pressure_relation_residual(art.system, art.solution);
  const auto [du, dp] = error_norms(art.system, art.solution, ms);
  art.result.delta_u = du;
  art.result.delta_p = dp;
  return art;
}

std::pair<double, double> error_norms(const GlobalSystem& sys,
                                      const ContactSolution& sol,
                                      const ManufacturedSolution& ms) {
  double du2 = 0.0, dp2 = 0.0;
  for (int b = 0; b < 2; ++b) {
    for (int c = 0; c < sys.mesh[b].num_cells(); ++c) {
      const LocalElement& el = sys.elements[b][c];
      const Eigen::VectorXd coeffs = el.project(sys.local_dofs(b, c, sol.u));
      const Eigen::VectorXd pc = sys.local_pressure(b, c, sol.p);
      const PolygonRule rule = polygon_rule(el.pts, 2 * sys.k + 2);
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const Vec2& x = rule.points[q];
        const Eigen::Matrix2d gdiff = ms.grad_u(b, x) - el.poly_grad(coeffs, x);
        du2 += rule.weights[q] * gdiff.squaredNorm();
        double ph = 0.0;
        for (int j = 0; j < pc.size(); ++j) ph += pc[j] * el.moments.basis.eval(j, x);
        const double pdiff = ms.p(b, x) - ph;
        dp2 += rule.weights[q] * pdiff * pdiff;
      }
    }
  }
  return {std::sqrt(du2), std::sqrt(dp2)};
}

double fit_rate(const std::vector<double>& h, const std::vector<double>& err) {
  if (h.size() != err.size() || h.size() < 3)
    throw std::invalid_argument("fit_rate: need at least 3 levels");
  const int n = static_cast<int>(h.size());
  double mx = 0.0, my = 0.0;
  std::vector<double> lx(n), ly(n);
  for (int i = 0; i < n; ++i) {
    lx[i] = std::log(h[i]);
    ly[i] = std::log(std::max(err[i], 1e-300));
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) * (lx[i] - mx);
  }
  return num / den;
}

ConvergenceReport run_convergence(MeshFamily family, int k, double lambda,
                                  ContactConfig config, const ManufacturedSolution& ms,
                                  StabMode stab, std::uint64_t seed, int skip_levels,
                                  int jobs) {
  const std::vector<int> levels = family_levels(family);
  ConvergenceReport rep;
  rep.rows.resize(levels.size());

  auto run_level = [&](std::size_t i) {
    AnalyticCase c;
    c.family = family;
    c.cells = levels[i];
    c.k = k;
    c.lambda = lambda;
    c.config = config;
    c.stab = stab;
    c.seed = seed;
    rep.rows[i] = run_analytic_case(c, ms).result;
  };

  if (jobs <= 1) {
    for (std::size_t i = 0; i < levels.size(); ++i) run_level(i);
  } else {
    std::vector<std::future<void>> running;
    for (std::size_t i = 0; i < levels.size(); ++i) {
      running.push_back(std::async(std::launch::async, run_level, i));
      if (static_cast<int>(running.size()) >= jobs) {
        for (auto& f : running) f.get();
        running.clear();
      }
    }
    for (auto& f : running) f.get();
  }

  std::vector<double> h, eu, ep;
  for (std::size_t i = static_cast<std::size_t>(std::max(skip_levels, 0));
       i < rep.rows.size(); ++i) {
    h.push_back(rep.rows[i].h);
    eu.push_back(rep.rows[i].delta_u);
    ep.push_back(rep.rows[i].delta_p);
  }
  rep.slope_u = fit_rate(h, eu);
  rep.slope_p = fit_rate(h, ep);
  return rep;
}

double HertzReference::p_n(double x) const {
  if (std::abs(x) >= b) return 0.0;
  return p_max / b * std::sqrt(b * b - x * x);
}

HertzReference hertz_reference(const HertzSpec& spec) {
  HertzReference ref;
  const double inv = (1.0 - spec.nu_square * spec.nu_square) / spec.E_square +
                     (1.0 - spec.nu_disk * spec.nu_disk) / spec.E_disk;
  ref.E_star = 1.0 / inv;
  ref.b = 2.0 * std::sqrt(2.0 * spec.R * spec.R * spec.pressure / (M_PI * ref.E_star));
  ref.p_max = 4.0 * spec.R * spec.pressure / (M_PI * ref.b);
  return ref;
}

std::vector<double> recover_contact_pressure(const GlobalSystem& sys,
                                             const ContactSolution& sol,
                                             const ContactTrace& trace) {
  const PolyMesh& slave = sys.mesh[0];
  std::vector<std::vector<int>> cells_of_vertex(slave.num_vertices());
  for (int c = 0; c < slave.num_cells(); ++c)
    for (int v : slave.cells[c]) cells_of_vertex[v].push_back(c);

  std::vector<double> sigma(trace.nodes.size(), 0.0);
  for (std::size_t l = 0; l < trace.nodes.size(); ++l) {
    const int v = trace.nodes[l].slave_vertex;
    const Vec2 x = trace.nodes[l].slave_pos;
    double acc = 0.0;
    int count = 0;
    for (int c : cells_of_vertex[v]) {
      const LocalElement& el = sys.elements[0][c];
      const Eigen::VectorXd coeffs = el.project(sys.local_dofs(0, c, sol.u));
      const Eigen::Matrix2d g = el.poly_grad(coeffs, x);
      const Eigen::Matrix2d eps = 0.5 * (g + g.transpose());
      const Eigen::VectorXd pc = sys.local_pressure(0, c, sol.p);
      double ph = 0.0;
      for (int j = 0; j < pc.size(); ++j) ph += pc[j] * el.moments.basis.eval(j, x);
      const Eigen::Matrix2d stress =
          2.0 * sys.mat[0].mu * eps + ph * Eigen::Matrix2d::Identity();
      acc += trace.n1.dot(stress * trace.n1);
      ++count;
    }
    sigma[l] = acc / std::max(count, 1);
  }
  return sigma;
}

HertzResult run_hertz(const HertzSpec& spec, int disk_cells, int k,
                      const UzawaConfig& solver, StabMode stab) {
  const double R = spec.R, L = spec.L;
  const double zone = 0.5 * R;  // contact candidate band |x| <= zone
  const double tol = 1e-9 * R;

  PolyMesh square = build_square_mesh({-L / 2, -L, L / 2, 0.0}, 4);
  square.body_id = 2;
  PolyMesh disk = build_half_disk_mesh(R, disk_cells);
  disk.body_id = 1;

  // split both contact chains exactly at the band boundary, then label
  split_boundary_edge_at(square, {-zone, 0.0}, 1e-9);
  split_boundary_edge_at(square, {zone, 0.0}, 1e-9);
  for (double sx : {-zone, zone}) {
    // locate the curved (chordal) boundary edge of the disk crossing x = sx
    bool done = false;
    for (std::size_t e = 0; e < disk.edges.size() && !done; ++e) {
      if (!disk.edges[e].boundary()) continue;
      const Vec2 a = disk.vertices[disk.edges[e].v0];
      const Vec2 b = disk.vertices[disk.edges[e].v1];
      if (std::abs(a.y() - R) < tol && std::abs(b.y() - R) < tol) continue;  // flat top
      if ((a.x() - sx) * (b.x() - sx) >= 0.0) continue;
      const double t = (sx - a.x()) / (b.x() - a.x());
      split_boundary_edge_at(disk, a + t * (b - a), 1e-9);
      done = true;
    }
    if (!done) throw std::runtime_error("run_hertz: no chord crossing the band boundary");
  }

  square.label_boundary(
      [&](const Vec2& x) { return std::abs(x.y()) < tol && std::abs(x.x()) < zone; },
      BoundaryLabel::Contact);
  square.label_boundary([&](const Vec2& x) { return std::abs(x.y() + L) < tol; },
                        BoundaryLabel::Dirichlet);
  for (auto& e : square.edges)
    if (e.boundary() && e.label == BoundaryLabel::Unset) e.label = BoundaryLabel::Neumann;

  disk.label_boundary(
      [&](const Vec2& x) {
        return std::abs(x.y() - R) > tol && std::abs(x.x()) < zone && x.y() < 0.5 * R;
      },
      BoundaryLabel::Contact);
  for (auto& e : disk.edges)
    if (e.boundary() && e.label == BoundaryLabel::Unset) e.label = BoundaryLabel::Neumann;

  InsertionResult ins = insert_matching_nodes(disk, square);

  const BodyMaterial mat_disk =
      BodyMaterial::from_young_poisson(spec.E_disk, spec.nu_disk);
  const BodyMaterial mat_square =
      BodyMaterial::from_young_poisson(spec.E_square, spec.nu_square);

  const double load = spec.pressure;
  const NeumannField neumann = [R, load, tol](int b, const Vec2& x, const Vec2&) {
    if (b == 0 && std::abs(x.y() - R) < tol) return Vec2(0.0, -load);
    return Vec2(0.0, 0.0);
  };
  const BodyField zero_f = [](int, const Vec2&) { return Vec2(0.0, 0.0); };
  GlobalSystem sys =
      assemble(ins.slave, ins.master, mat_disk, mat_square, k, zero_f, neumann, stab);

  // symmetry-axis pinning of the disk's horizontal displacement
  std::vector<std::pair<int, double>> pins;
  for (int v = 0; v < sys.mesh[0].num_vertices(); ++v)
    if (std::abs(sys.mesh[0].vertices[v].x()) < tol)
      pins.emplace_back(sys.num.vdof(0, v, 0), 0.0);
  for (std::size_t e = 0; e < sys.mesh[0].edges.size(); ++e) {
    const Vec2 mid = sys.mesh[0].edge_midpoint(static_cast<int>(e));
    if (std::abs(mid.x()) >= tol) continue;
    if (k == 2) {
      pins.emplace_back(sys.num.edof(0, static_cast<int>(e), 0), 0.0);
    } else {
      const Vec2 n = sys.mesh[0].edge_canonical_normal(static_cast<int>(e));
      if (std::abs(n.y()) < 1e-9)  // vertical edge: normal dof is +-u_x
        pins.emplace_back(sys.num.edof(0, static_cast<int>(e)), 0.0);
    }
  }
  const BodyField zero_u = [](int, const Vec2&) { return Vec2(0.0, 0.0); };
  const ReducedSystem red = apply_dirichlet(sys, zero_u, pins);

  const double s_touch = ins.trace.tangent.dot(Vec2(0.0, 0.0) - ins.trace.origin);
  const GapFunction gap =
      GapFunction::circular(R, ins.trace.origin, ins.trace.tangent, s_touch);
  const ContactConstraints cc = build_contact_constraints(ins.trace, sys, gap);

  // the touch-point vertex constraint anchors the disk's vertical rigid
  // mode; enforce it as an equality inside the factorization
  UzawaConfig ucfg = solver;
  int touch_row = 0;
  double best = std::numeric_limits<double>::max();
  for (std::size_t l = 0; l < ins.trace.nodes.size(); ++l) {
    const double d = std::abs(ins.trace.nodes[l].s - s_touch);
    if (d < best) {
      best = d;
      touch_row = static_cast<int>(l);
    }
  }
  ucfg.equality_rows.push_back(touch_row);

  ContactSolution sol = uzawa_solve(red, cc, sys, ucfg);

  HertzResult res;
  res.disk_cells = disk_cells;
  res.iterations = sol.iterations;
  res.log_factor = quality_report(ins.slave, ins.master).log_factor;

  const std::vector<double> sigma = recover_contact_pressure(sys, sol, ins.trace);
  const HertzReference ref = hertz_reference(spec);
  res.x.resize(sigma.size());
  res.sigma_n = sigma;
  res.p_exact.resize(sigma.size());
  double pmax = 0.0;
  for (std::size_t l = 0; l < sigma.size(); ++l) {
    res.x[l] = ins.trace.nodes[l].s - s_touch;
    res.p_exact[l] = ref.p_n(res.x[l]);
    pmax = std::max(pmax, -sigma[l]);
  }
  res.p_max = pmax;

  // half-width: magnitude crossing of 5% of the recovered peak, linearly
  // interpolated between straddling contact vertices, averaged over sides
  const double thresh = 0.05 * pmax;
  auto crossing = [&](int dir) {
    // walk outward from the centre on one side, sorted by |x|
    std::vector<std::pair<double, double>> side;  // (|x|, magnitude)
    for (std::size_t l = 0; l < sigma.size(); ++l)
      if (res.x[l] * dir >= -1e-14)
        side.emplace_back(std::abs(res.x[l]), -res.sigma_n[l]);
    std::sort(side.begin(), side.end());
    for (std::size_t i = 1; i < side.size(); ++i) {
      const auto [x0, v0] = side[i - 1];
      const auto [x1, v1] = side[i];
      if (v0 >= thresh && v1 < thresh) {
        const double t = (v0 - thresh) / std::max(v0 - v1, 1e-30);
        return x0 + t * (x1 - x0);
      }
    }
    return side.empty() ? 0.0 : side.back().first;
  };
  res.half_width = 0.5 * (crossing(+1) + crossing(-1));
  return res;
}

}  // namespace vemc
