// Command-line driver: configures a flow problem, runs the iterated penalty
// solvers, and emits iteration histories, field samples, and mesh diagnostics.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <sstream>

#include "svflow/analysis.hpp"
#include "svflow/solver.hpp"

using namespace svflow;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolverAbort = 3;
constexpr int kExitEquivalence = 4;

struct RunConfig {
  std::string problem = "kovasznay";
  std::string mesh_file;
  int nx = 4, ny = 4;
  int p = 4;
  double lambda = 1e3;
  double div_tol = 1e-10;
  int max_iters = 8;
  std::string method = "scip";
  std::string history_out;
  std::string field_out;
  std::string grid = "50";
  bool diagnostics = false;
  std::string diag_out = "diagnostics.kv";
  double nu = 0.1;
  bool serial = false;
  std::vector<int> sweep_p;
  std::vector<double> sweep_lambda;
  std::string sweep_out;
};

std::string format_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", s);
  return buf;
}

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_history(const std::string& path, const DiscreteSolution& sol, bool with_errors) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open history file '" + path + "'");
  out << "iter,div_norm";
  if (with_errors) out << ",rel_H1_err,rel_L2_press_err";
  out << ",seconds\n";
  for (const auto& r : sol.history) {
    out << r.iter << "," << format_full(r.div_norm);
    if (with_errors)
      out << "," << format_full(r.rel_h1_err) << "," << format_full(r.rel_press_err);
    out << "," << format_seconds(r.seconds) << "\n";
  }
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || path.find('/', dot) != std::string::npos)
    return path + suffix;
  return path.substr(0, dot) + suffix + path.substr(dot);
}

std::pair<int, int> parse_grid(const std::string& grid) {
  const auto x = grid.find('x');
  if (x == std::string::npos) {
    const int n = std::stoi(grid);
    return {n, n};
  }
  return {std::stoi(grid.substr(0, x)), std::stoi(grid.substr(x + 1))};
}

void write_field(const std::string& path, const SolutionField& field,
                 const std::pair<int, int>& grid) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open field file '" + path + "'");
  const Mesh& mesh = field.mesh();
  Eigen::Vector2d lo = mesh.vertex(0), hi = mesh.vertex(0);
  for (const auto& v : mesh.vertices()) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  out << "# x y u1 u2 p\n";
  out.precision(10);
  for (int j = 0; j < grid.second; ++j) {
    for (int i = 0; i < grid.first; ++i) {
      Eigen::Vector2d x = lo;
      x.x() += (hi.x() - lo.x()) * (grid.first == 1 ? 0.5 : double(i) / (grid.first - 1));
      x.y() += (hi.y() - lo.y()) * (grid.second == 1 ? 0.5 : double(j) / (grid.second - 1));
      const int t = field.locate(x);
      if (t < 0) continue;  // grid restricted to the mesh
      const Eigen::Vector2d u = field.velocity_at(x);
      out << x.x() << " " << x.y() << " " << u.x() << " " << u.y() << " "
          << field.pressure_at(x) << "\n";
    }
  }
}

Mesh make_mesh(const RunConfig& cfg) {
  if (!cfg.mesh_file.empty()) return load_mesh(cfg.mesh_file);
  if (cfg.problem == "moffatt") return gen_wedge();
  if (cfg.problem == "kovasznay") return gen_crisscross(cfg.nx, cfg.ny, kovasznay_domain());
  return gen_crisscross(cfg.nx, cfg.ny);
}

FlowProblem make_problem(const RunConfig& cfg) {
  if (cfg.problem == "kovasznay") return kovasznay_problem(cfg.nu);
  if (cfg.problem == "moffatt") return moffatt_problem();
  // custom: homogeneous Stokes on a user mesh, mainly for --diagnostics
  FlowProblem prob;
  prob.form.kind = FormKind::Stokes;
  prob.body_force = [](const Eigen::Vector2d&) { return Eigen::Vector2d::Zero().eval(); };
  prob.dirichlet_data = [](const Eigen::Vector2d&) { return Eigen::Vector2d::Zero().eval(); };
  return prob;
}

PenaltyConfig make_penalty(const RunConfig& cfg) {
  PenaltyConfig pc;
  pc.lambda = cfg.lambda;
  pc.div_tol = cfg.div_tol;
  pc.max_iters = cfg.max_iters;
  pc.exec = cfg.serial ? ExecMode::Serial : ExecMode::OpenMP;
  return pc;
}

DiscreteSolution run_method(Method m, const DofMap& dofmap, const FlowProblem& prob,
                            PenaltyConfig pc) {
  pc.method = m;
  return m == Method::IP ? ip_solve(dofmap, prob, pc) : scip_solve(dofmap, prob, pc);
}

void print_summary(const char* tag, const DiscreteSolution& sol) {
  std::printf("%s: dim=%ld iters=%d final div=%.3e%s%s\n", tag, sol.stats.system_dim,
              sol.stats.iterations, sol.history.back().div_norm,
              sol.stats.converged ? " (converged)" : "",
              sol.stats.aborted ? " (ABORTED)" : "");
  if (!std::isnan(sol.history.back().rel_h1_err))
    std::printf("%s: rel H1 err=%.3e rel press err=%.3e\n", tag,
                sol.history.back().rel_h1_err, sol.history.back().rel_press_err);
}

int run_single(const RunConfig& cfg) {
  const Mesh mesh = make_mesh(cfg);
  const FlowProblem prob = make_problem(cfg);
  const DofMap dofmap(mesh, cfg.p);
  const PenaltyConfig pc = make_penalty(cfg);
  const bool with_errors = prob.exact.has_value();

  if (cfg.diagnostics) {
    const DiagnosticsReport rep = build_diagnostics(mesh, cfg.p);
    std::cout << format_diagnostics(rep);
    if (!cfg.diag_out.empty()) {
      std::ofstream kv(cfg.diag_out);
      kv << format_diagnostics_kv(rep);
      std::printf("diagnostics key-value file: %s\n", cfg.diag_out.c_str());
    }
  }

  int status = 0;
  if (cfg.method == "both") {
    const DiscreteSolution ip = run_method(Method::IP, dofmap, prob, pc);
    const DiscreteSolution scip = run_method(Method::SCIP, dofmap, prob, pc);
    print_summary("ip", ip);
    print_summary("scip", scip);
    if (!cfg.history_out.empty()) {
      write_history(with_suffix(cfg.history_out, "_ip"), ip, with_errors);
      write_history(with_suffix(cfg.history_out, "_scip"), scip, with_errors);
    }
    const SolutionField f_ip = reconstruct(dofmap, ip);
    const SolutionField f_scip = reconstruct(dofmap, scip);
    const double h1_diff = velocity_h1_diff(f_ip, f_scip) / velocity_h1_norm(f_ip);
    const double press_norm = pressure_l2_norm(f_ip);
    const double press_diff =
        pressure_l2_diff(f_ip, f_scip) / (press_norm > 0 ? press_norm : 1.0);
    std::printf("method equivalence: rel H1 diff=%.3e rel press diff=%.3e\n", h1_diff,
                press_diff);
    if (ip.stats.aborted || scip.stats.aborted) return kExitSolverAbort;
    if (h1_diff > 1e-8 || press_diff > 1e-7) {
      std::fprintf(stderr, "equivalence check failed\n");
      return kExitEquivalence;
    }
    if (!cfg.field_out.empty()) write_field(cfg.field_out, f_scip, parse_grid(cfg.grid));
    return 0;
  }

  const Method m = cfg.method == "ip" ? Method::IP : Method::SCIP;
  const DiscreteSolution sol = run_method(m, dofmap, prob, pc);
  print_summary(cfg.method.c_str(), sol);
  if (!cfg.history_out.empty()) write_history(cfg.history_out, sol, with_errors);
  if (!cfg.field_out.empty())
    write_field(cfg.field_out, reconstruct(dofmap, sol), parse_grid(cfg.grid));
  if (sol.stats.aborted) {
    std::fprintf(stderr, "solver aborted: %s\n", sol.stats.abort_reason.c_str());
    status = kExitSolverAbort;
  }
  return status;
}

int run_sweep(const RunConfig& cfg) {
  const Mesh mesh = make_mesh(cfg);
  const FlowProblem prob = make_problem(cfg);
  const bool with_errors = prob.exact.has_value();
  const Method m = cfg.method == "ip" ? Method::IP : Method::SCIP;

  std::ostringstream csv;
  csv << "p,lambda,iters,final_div,rel_H1_err,rel_L2_press_err,decay_ratio,seconds,warning\n";
  std::map<std::pair<double, int>, double> plateau;  // (lambda, p) -> final H1 err
  int status = 0;
  for (int p : cfg.sweep_p) {
    const DofMap dofmap(mesh, p);
    for (double lam : cfg.sweep_lambda) {
      RunConfig one = cfg;
      one.p = p;
      one.lambda = lam;
      PenaltyConfig pc = make_penalty(one);
      const auto t0 = std::chrono::steady_clock::now();
      const DiscreteSolution sol = run_method(m, dofmap, prob, pc);
      const double seconds = std::chrono::duration<double>(
                                 std::chrono::steady_clock::now() - t0)
                                 .count();
      const auto& last = sol.history.back();
      std::string warning;
      if (sol.stats.aborted) {
        warning = "aborted";
        status = kExitSolverAbort;
      }
      if (with_errors) plateau[{lam, p}] = last.rel_h1_err;
      if (with_errors && p > 10) {
        // conditioning of the high-degree basis shows up as a plateau that
        // stops improving past p = 10
        const auto ref = plateau.find({lam, 10});
        if (ref != plateau.end() && last.rel_h1_err > ref->second) {
          warning = warning.empty() ? "bernstein-conditioning" : warning;
          std::printf("warning: p=%d plateau error %.3e exceeds the p=10 plateau %.3e "
                      "(high-degree basis conditioning)\n",
                      p, last.rel_h1_err, ref->second);
        }
      }
      csv << p << "," << lam << "," << sol.stats.iterations << ","
          << format_full(last.div_norm) << ",";
      if (with_errors)
        csv << format_full(last.rel_h1_err) << "," << format_full(last.rel_press_err);
      else
        csv << ",";
      csv << "," << format_full(decay_ratio(sol.history, pc.div_tol)) << ","
          << format_seconds(seconds) << "," << warning << "\n";
      if (!cfg.history_out.empty()) {
        std::ostringstream suffix;
        suffix << "_p" << p << "_lam" << lam;
        write_history(with_suffix(cfg.history_out, suffix.str()), sol, with_errors);
      }
      std::printf("p=%2d lambda=%g: iters=%d final div=%.3e\n", p, lam,
                  sol.stats.iterations, last.div_norm);
    }
  }
  if (!cfg.sweep_out.empty()) {
    std::ofstream out(cfg.sweep_out);
    out << csv.str();
  } else {
    std::cout << csv.str();
  }
  return status;
}

void apply_config_file(const CLI::App& app, const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot open config file '" + path + "'");
  nlohmann::json j;
  in >> j;
  auto fetch = [&](const char* flag, auto& field) {
    using T = std::decay_t<decltype(field)>;
    if (j.contains(flag) && app.count(std::string("--") + flag) == 0)
      field = j.at(flag).get<T>();
  };
  fetch("problem", cfg.problem);
  fetch("mesh", cfg.mesh_file);
  fetch("nx", cfg.nx);
  fetch("ny", cfg.ny);
  fetch("p", cfg.p);
  fetch("lambda", cfg.lambda);
  fetch("div-tol", cfg.div_tol);
  fetch("max-iters", cfg.max_iters);
  fetch("method", cfg.method);
  fetch("history-out", cfg.history_out);
  fetch("field-out", cfg.field_out);
  fetch("grid", cfg.grid);
  fetch("diagnostics", cfg.diagnostics);
  fetch("diag-out", cfg.diag_out);
  fetch("nu", cfg.nu);
  fetch("serial", cfg.serial);
  fetch("sweep-p", cfg.sweep_p);
  fetch("sweep-lambda", cfg.sweep_lambda);
  fetch("sweep-out", cfg.sweep_out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scott-Vogelius incompressible-flow solver (iterated penalty / SCIP)"};
  RunConfig cfg;
  std::string config_file;

  app.add_option("--config", config_file, "JSON config file (flags override it)");
  app.add_option("--problem", cfg.problem, "kovasznay | moffatt | custom")
      ->check(CLI::IsMember({"kovasznay", "moffatt", "custom"}));
  app.add_option("--mesh", cfg.mesh_file, "mesh file (overrides the generator)");
  app.add_option("--nx", cfg.nx, "criss-cross cells in x")->check(CLI::PositiveNumber);
  app.add_option("--ny", cfg.ny, "criss-cross cells in y")->check(CLI::PositiveNumber);
  app.add_option("--p", cfg.p, "polynomial degree (>= 4)")->check(CLI::Range(4, 20));
  app.add_option("--lambda", cfg.lambda, "penalty parameter")->check(CLI::PositiveNumber);
  app.add_option("--div-tol", cfg.div_tol, "stopping tolerance on ||div u||");
  app.add_option("--max-iters", cfg.max_iters, "iteration cap")->check(CLI::PositiveNumber);
  app.add_option("--method", cfg.method, "ip | scip | both")
      ->check(CLI::IsMember({"ip", "scip", "both"}));
  app.add_option("--history-out", cfg.history_out, "iteration history CSV path");
  app.add_option("--field-out", cfg.field_out, "sampled field table path");
  app.add_option("--grid", cfg.grid, "field sampling grid: N or NXxNY");
  app.add_flag("--diagnostics", cfg.diagnostics, "emit the mesh/structure report");
  app.add_option("--diag-out", cfg.diag_out, "key-value diagnostics file");
  app.add_option("--nu", cfg.nu, "viscosity (kovasznay)")->check(CLI::PositiveNumber);
  app.add_flag("--serial", cfg.serial, "disable OpenMP element loops");
  app.add_option("--sweep-p", cfg.sweep_p, "degree list for a sweep")->delimiter(',');
  app.add_option("--sweep-lambda", cfg.sweep_lambda, "lambda list for a sweep")
      ->delimiter(',');
  app.add_option("--sweep-out", cfg.sweep_out, "sweep summary CSV path");

  try {
    app.parse(argc, argv);
    if (!config_file.empty()) apply_config_file(app, config_file, cfg);
    if (cfg.problem == "custom" && cfg.mesh_file.empty() && app.count("--nx") == 0)
      throw CLI::ValidationError("--problem", "custom problem needs --mesh or --nx/--ny");
    if (cfg.sweep_p.empty() != cfg.sweep_lambda.empty())
      throw CLI::ValidationError("--sweep-p", "sweeps need both --sweep-p and --sweep-lambda");
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (!cfg.sweep_p.empty()) return run_sweep(cfg);
    return run_single(cfg);
  } catch (const MeshError& e) {
    std::fprintf(stderr, "mesh error: %s\n", e.what());
    return kExitConfig;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return kExitSolverAbort;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
}
