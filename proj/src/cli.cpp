#include "vemc/cli.hpp"

#include <array>
#include <cstdio>
#include <filesystem>
#include <future>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "vemc/bench.hpp"

namespace vemc {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Atomic write: temp file in the same directory, then rename.
void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + tmp.string());
    os << content;
  }
  fs::rename(tmp, path);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

struct Options {
  std::string experiment = "patch";
  int k = 1;
  std::string family = "Q";
  std::vector<int> levels;
  std::vector<double> lambdas;
  std::string config = "IM";
  std::string stab = "scaled";
  double rho = 0.0;
  double tol = 1e-12;
  int maxit = 100000;
  int jobs = 1;
  std::uint64_t seed = 7;
  std::string out = "out";
  std::string config_file;
  std::string mesh1, mesh2;  // custom experiment
  double mu1 = 1.0, lambda1 = 10.0, mu2 = 1.0, lambda2 = 10.0;
  std::string gap = "zero";
};

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::map<std::string, std::string> kv;
  std::ifstream is(path);
  if (!is) throw CLI::ValidationError("--config-file", "cannot open " + path);
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!key.empty()) kv[key] = value;
  }
  return kv;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

std::string canonical_config(const Options& o) {
  std::ostringstream ss;
  ss << "experiment=" << o.experiment << "\nk=" << o.k << "\nfamily=" << o.family
     << "\nlevels=";
  for (int l : o.levels) ss << l << ',';
  ss << "\nlambda=";
  for (double l : o.lambdas) ss << fmt(l) << ',';
  ss << "\nconfig=" << o.config << "\nstab=" << o.stab << "\nrho=" << fmt(o.rho)
     << "\ntol=" << fmt(o.tol) << "\nmaxit=" << o.maxit << "\nseed=" << o.seed
     << "\nmesh1=" << o.mesh1 << "\nmesh2=" << o.mesh2 << "\ngap=" << o.gap << "\n";
  return ss.str();
}

StabMode stab_from_string(const std::string& s) {
  if (s == "scaled") return StabMode::Scaled;
  if (s == "literal") return StabMode::Literal;
  throw CLI::ValidationError("--stab", "must be 'scaled' or 'literal'");
}

ContactConfig contact_config_from_string(const std::string& s) {
  if (s == "IM") return ContactConfig::IM;
  if (s == "SE") return ContactConfig::SE;
  throw CLI::ValidationError("--config", "must be 'IM' or 'SE'");
}

UzawaConfig solver_config(const Options& o) {
  UzawaConfig cfg;
  cfg.rho = o.rho;
  cfg.tol = o.tol;
  cfg.max_iterations = o.maxit;
  cfg.seed = o.seed + 1000;
  return cfg;
}

int run_patch_or_trig(const Options& o, const std::string& hash_hex) {
  const bool is_patch = o.experiment == "patch";
  const MeshFamily family = family_from_string(o.family);
  const ContactConfig config = contact_config_from_string(o.config);
  const StabMode stab = stab_from_string(o.stab);
  std::vector<int> levels = o.levels.empty() ? family_levels(family) : o.levels;
  std::vector<double> lambdas = o.lambdas.empty() ? std::vector<double>{10.0} : o.lambdas;

  nlohmann::json meta;
  meta["experiment"] = o.experiment;
  meta["config_hash"] = hash_hex;
  meta["k"] = o.k;
  meta["family"] = o.family;
  meta["configuration"] = o.config;
  meta["stab"] = o.stab;
  meta["seed"] = o.seed;
  auto& jruns = meta["runs"] = nlohmann::json::array();

  std::ostringstream patch_csv;
  if (is_patch)
    patch_csv << "family,cells,k,lambda,config,delta_u,delta_p,iters,log_factor\n";

  int exit_code = 0;
  for (double lambda : lambdas) {
    const ManufacturedSolution ms =
        is_patch ? patch_solution(lambda) : trig_solution(lambda);
    std::vector<CaseResult> rows(levels.size());
    std::vector<std::array<std::string, 2>> mesh_texts(levels.size());
    const std::string iterlog = (fs::path(o.out) / "iterations.csv.tmp-log").string();

    // independent mesh levels run concurrently, bounded by --jobs; all
    // output writing stays serialized below
    auto run_level = [&](std::size_t i) {
      AnalyticCase c;
      c.family = family;
      c.cells = levels[i];
      c.k = o.k;
      c.lambda = lambda;
      c.config = config;
      c.stab = stab;
      c.seed = o.seed;
      c.solver = solver_config(o);
      if (i + 1 == levels.size()) c.solver.iteration_log_path = iterlog;
      CaseArtifacts art = run_analytic_case(c, ms);
      rows[i] = art.result;
      for (int b = 0; b < 2; ++b) {
        std::ostringstream mesh_text;
        write_mesh(art.system.mesh[b], mesh_text);
        mesh_texts[i][b] = mesh_text.str();
      }
    };
    if (o.jobs <= 1) {
      for (std::size_t i = 0; i < levels.size(); ++i) run_level(i);
    } else {
      std::vector<std::future<void>> running;
      for (std::size_t i = 0; i < levels.size(); ++i) {
        running.push_back(std::async(std::launch::async, run_level, i));
        if (static_cast<int>(running.size()) >= o.jobs) {
          for (auto& fut : running) fut.get();
          running.clear();
        }
      }
      for (auto& fut : running) fut.get();
    }
    for (std::size_t i = 0; i < levels.size(); ++i)
      for (int b = 0; b < 2; ++b) {
        std::ostringstream ms_name;
        ms_name << "mesh_" << family_name(family) << levels[i] << "_lam" << lambda
                << "_body" << (b + 1) << ".vemmesh";
        write_atomic(fs::path(o.out) / ms_name.str(), mesh_texts[i][b]);
      }
    if (fs::exists(iterlog)) fs::rename(iterlog, fs::path(o.out) / "iterations.csv");

    nlohmann::json jrun;
    jrun["lambda"] = lambda;
    auto& jrows = jrun["rows"] = nlohmann::json::array();
    std::ostringstream csv;
    csv << kTrigCsvHeader << "\n";
    for (const auto& r : rows) {
      csv << fmt(r.h) << ',' << r.ndof_u << ',' << r.ndof_p << ',' << fmt(r.delta_u)
          << ',' << fmt(r.delta_p) << ',' << r.iterations << ',' << fmt(r.log_factor)
          << "\n";
      if (is_patch) {
        // cells recovered from the level list by index
        patch_csv << o.family << ','
                  << levels[&r - rows.data()] << ',' << o.k << ',' << fmt(lambda)
                  << ',' << o.config << ',' << fmt(r.delta_u) << ',' << fmt(r.delta_p)
                  << ',' << r.iterations << ',' << fmt(r.log_factor) << "\n";
      }
      jrows.push_back({{"h", r.h},
                       {"ndof_u", r.ndof_u},
                       {"ndof_p", r.ndof_p},
                       {"delta_u", r.delta_u},
                       {"delta_p", r.delta_p},
                       {"iters", r.iterations},
                       {"log_factor", r.log_factor},
                       {"kkt_primal", r.kkt.primal},
                       {"kkt_dual", r.kkt.dual},
                       {"kkt_complementarity", r.kkt.complementarity}});
    }
    if (!is_patch && rows.size() >= 3) {
      std::vector<double> h, eu, ep;
      for (const auto& r : rows) {
        h.push_back(r.h);
        eu.push_back(r.delta_u);
        ep.push_back(r.delta_p);
      }
      jrun["slope_u"] = fit_rate(h, eu);
      jrun["slope_p"] = fit_rate(h, ep);
    }
    if (!is_patch) {
      csv << "# config_hash " << hash_hex << "\n";
      const std::string name = lambdas.size() == 1
                                   ? "report.csv"
                                   : "report_lambda" + fmt(lambda) + ".csv";
      write_atomic(fs::path(o.out) / name, csv.str());
    }
    jruns.push_back(jrun);
  }
  if (is_patch) {
    patch_csv << "# config_hash " << hash_hex << "\n";
    write_atomic(fs::path(o.out) / "report.csv", patch_csv.str());
  }
  write_atomic(fs::path(o.out) / "report.json", meta.dump(2) + "\n");
  return exit_code;
}

int run_hertz_cli(const Options& o, const std::string& hash_hex) {
  std::vector<int> levels = o.levels.empty() ? std::vector<int>{16, 64, 256} : o.levels;
  const HertzSpec spec;
  const HertzReference ref = hertz_reference(spec);

  nlohmann::json meta;
  meta["experiment"] = "hertz";
  meta["config_hash"] = hash_hex;
  meta["k"] = o.k;
  meta["reference"] = {{"E_star", ref.E_star}, {"b", ref.b}, {"p_max", ref.p_max}};
  auto& jruns = meta["runs"] = nlohmann::json::array();

  std::ostringstream csv;
  csv << "disk_cells,p_max,half_width,iters,log_factor\n";
  HertzResult finest;
  for (int cells : levels) {
    const HertzResult hr = run_hertz(spec, cells, o.k, solver_config(o),
                                     stab_from_string(o.stab));
    csv << cells << ',' << fmt(hr.p_max) << ',' << fmt(hr.half_width) << ','
        << hr.iterations << ',' << fmt(hr.log_factor) << "\n";
    jruns.push_back({{"disk_cells", cells},
                     {"p_max", hr.p_max},
                     {"half_width", hr.half_width},
                     {"iters", hr.iterations},
                     {"log_factor", hr.log_factor}});
    finest = hr;
  }
  csv << "# config_hash " << hash_hex << "\n";
  write_atomic(fs::path(o.out) / "report.csv", csv.str());

  std::ostringstream prof;
  prof << "x,sigma_n,p_n_exact\n";
  for (std::size_t i = 0; i < finest.x.size(); ++i)
    prof << fmt(finest.x[i]) << ',' << fmt(finest.sigma_n[i]) << ','
         << fmt(-finest.p_exact[i]) << "\n";
  prof << "# config_hash " << hash_hex << "\n";
  write_atomic(fs::path(o.out) / "pressure_profile.csv", prof.str());
  write_atomic(fs::path(o.out) / "report.json", meta.dump(2) + "\n");
  return 0;
}

int run_custom(const Options& o, const std::string& hash_hex) {
  if (o.mesh1.empty() || o.mesh2.empty())
    throw CLI::ValidationError("custom", "custom experiment needs mesh1= and mesh2=");
  PolyMesh slave = load_mesh(o.mesh1);
  slave.body_id = 1;
  PolyMesh master = load_mesh(o.mesh2);
  master.body_id = 2;
  InsertionResult ins = insert_matching_nodes(slave, master);

  const BodyField zero = [](int, const Vec2&) { return Vec2(0.0, 0.0); };
  const NeumannField zero_n = [](int, const Vec2&, const Vec2&) { return Vec2(0.0, 0.0); };
  GlobalSystem sys = assemble(ins.slave, ins.master, {o.mu1, o.lambda1},
                              {o.mu2, o.lambda2}, o.k, zero, zero_n,
                              stab_from_string(o.stab));
  const ReducedSystem red = apply_dirichlet(sys, zero);

  GapFunction gap = GapFunction::zero();
  if (o.gap.rfind("circular:", 0) == 0) {
    const double R = std::stod(o.gap.substr(9));
    const double s_touch = ins.trace.tangent.dot(Vec2(0, 0) - ins.trace.origin);
    gap = GapFunction::circular(R, ins.trace.origin, ins.trace.tangent, s_touch);
  } else if (o.gap != "zero") {
    throw CLI::ValidationError("--gap", "must be 'zero' or 'circular:<R>'");
  }
  const ContactConstraints cc = build_contact_constraints(ins.trace, sys, gap);
  const ContactSolution sol = uzawa_solve(red, cc, sys, solver_config(o));

  nlohmann::json meta;
  meta["experiment"] = "custom";
  meta["config_hash"] = hash_hex;
  meta["iters"] = sol.iterations;
  meta["kkt"] = {{"primal", sol.kkt.primal},
                 {"dual", sol.kkt.dual},
                 {"complementarity", sol.kkt.complementarity},
                 {"energy", sol.kkt.energy}};
  meta["u_max"] = sol.u.lpNorm<Eigen::Infinity>();
  write_atomic(fs::path(o.out) / "report.json", meta.dump(2) + "\n");
  std::ostringstream tj;
  tj << trace_to_json(ins.trace, gap) << "\n";
  write_atomic(fs::path(o.out) / "trace.json", tj.str());
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
  Options o;
  CLI::App app{"Mixed u/p virtual element solver for two-body frictionless contact"};
  app.add_option("--experiment", o.experiment, "patch | trig | hertz | custom")
      ->check(CLI::IsMember({"patch", "trig", "hertz", "custom"}));
  app.add_option("--k", o.k, "element order (1 or 2)")->check(CLI::Range(1, 2));
  app.add_option("--family", o.family, "mesh family Q | H | W");
  std::string levels_str, lambda_str;
  app.add_option("--levels", levels_str, "comma-separated cell counts");
  app.add_option("--lambda", lambda_str, "comma-separated Lame lambda values");
  app.add_option("--config", o.config, "contact configuration IM | SE");
  app.add_option("--stab", o.stab, "stabilization: scaled | literal");
  app.add_option("--rho", o.rho, "Uzawa step (0 = auto)");
  app.add_option("--tol", o.tol, "Uzawa tolerance");
  app.add_option("--maxit", o.maxit, "Uzawa iteration cap");
  app.add_option("--jobs", o.jobs, "concurrent mesh levels");
  app.add_option("--seed", o.seed, "RNG seed");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--config-file", o.config_file, "flat key=value config file");

  std::vector<const char*> argv;
  argv.push_back("vemc");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());

    if (!o.config_file.empty()) {
      const auto kv = parse_config_file(o.config_file);
      auto get = [&](const char* key, auto setter) {
        auto it = kv.find(key);
        if (it != kv.end()) setter(it->second);
      };
      // flags win: only fill values the command line did not set
      get("experiment", [&](const std::string& v) {
        if (app.count("--experiment") == 0) o.experiment = v;
      });
      get("k", [&](const std::string& v) {
        if (app.count("--k") == 0) o.k = std::stoi(v);
      });
      get("family", [&](const std::string& v) {
        if (app.count("--family") == 0) o.family = v;
      });
      get("levels", [&](const std::string& v) {
        if (app.count("--levels") == 0) levels_str = v;
      });
      get("lambda", [&](const std::string& v) {
        if (app.count("--lambda") == 0) lambda_str = v;
      });
      get("config", [&](const std::string& v) {
        if (app.count("--config") == 0) o.config = v;
      });
      get("stab", [&](const std::string& v) {
        if (app.count("--stab") == 0) o.stab = v;
      });
      get("rho", [&](const std::string& v) {
        if (app.count("--rho") == 0) o.rho = std::stod(v);
      });
      get("tol", [&](const std::string& v) {
        if (app.count("--tol") == 0) o.tol = std::stod(v);
      });
      get("maxit", [&](const std::string& v) {
        if (app.count("--maxit") == 0) o.maxit = std::stoi(v);
      });
      get("jobs", [&](const std::string& v) {
        if (app.count("--jobs") == 0) o.jobs = std::stoi(v);
      });
      get("seed", [&](const std::string& v) {
        if (app.count("--seed") == 0) o.seed = std::stoull(v);
      });
      get("out", [&](const std::string& v) {
        if (app.count("--out") == 0) o.out = v;
      });
      get("mesh1", [&](const std::string& v) { o.mesh1 = v; });
      get("mesh2", [&](const std::string& v) { o.mesh2 = v; });
      get("mu1", [&](const std::string& v) { o.mu1 = std::stod(v); });
      get("lambda1", [&](const std::string& v) { o.lambda1 = std::stod(v); });
      get("mu2", [&](const std::string& v) { o.mu2 = std::stod(v); });
      get("lambda2", [&](const std::string& v) { o.lambda2 = std::stod(v); });
      get("gap", [&](const std::string& v) { o.gap = v; });
    }
    if (!levels_str.empty()) o.levels = parse_int_list(levels_str);
    if (!lambda_str.empty()) o.lambdas = parse_double_list(lambda_str);

    // validate enumerations before any computation or file output
    family_from_string(o.family);
    contact_config_from_string(o.config);
    stab_from_string(o.stab);
    if (o.tol <= 0 || o.maxit <= 0 || o.jobs <= 0)
      throw CLI::ValidationError("options", "tol, maxit and jobs must be positive");

    const std::string hash_hex = [&] {
      char buf[20];
      std::snprintf(buf, sizeof(buf), "%016llx",
                    static_cast<unsigned long long>(fnv1a(canonical_config(o))));
      return std::string(buf);
    }();

    fs::create_directories(o.out);
    if (o.experiment == "patch" || o.experiment == "trig")
      return run_patch_or_trig(o, hash_hex);
    if (o.experiment == "hertz") return run_hertz_cli(o, hash_hex);
    return run_custom(o, hash_hex);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return 0;  // --help
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const SolverNonConvergence& e) {
    std::cerr << "solver error: " << e.what() << " (last dy " << e.last_dy
              << ", primal " << e.last_primal << ")\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace vemc
