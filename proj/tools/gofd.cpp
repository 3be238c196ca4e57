#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "gofd/adaptivity.hpp"
#include "gofd/checks.hpp"
#include "gofd/error.hpp"
#include "gofd/io.hpp"
#include "gofd/problems.hpp"
#include "gofd/solver.hpp"
#include "gofd/symbol.hpp"

namespace fs = std::filesystem;
using namespace gofd;

namespace {

enum Exit { ok = 0, numeric = 1, usage = 2, not_converged = 3, stalled = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  int dim = 0;
  double s = 0.5;
  int k = 0;
  std::vector<std::string> mesh;
  std::vector<int> res;
  std::string rule = "default";
  double safety = 1.1;
  bool literal_spacing = false;
  std::string rhs = "grid";
  std::string precond = "auto";
  double tol = 1e-10;
  std::size_t max_iter = 5000;
  int lmax = 5;
  double tau = 1e-2;
  bool slide = false;
  bool no_timing = false;
  bool synthetic = false;
};

struct Globals {
  std::string out = "out";
  std::uint64_t seed = 0;
  std::string config;
};

const CLI::Validator open_unit{[](std::string& v) -> std::string {
                                 double x = std::stod(v);
                                 return x > 0 && x < 1 ? "" : "s must lie in the open interval (0,1), got " + v;
                               },
                               "in (0,1)"};

std::string fmt(double v) { return format_double(v); }

fs::path cache_dir(const Globals& g) {
  if (const char* env = std::getenv("GOFD_CACHE_DIR"); env && *env) return env;
  return fs::path(g.out) / "cache";
}

SimplicialMesh load_mesh(const std::string& spec) {
  auto colon = spec.find(':');
  if (colon != std::string::npos) {
    const std::string kind = spec.substr(0, colon);
    if (kind == "interval" || kind == "disk" || kind == "lshape" || kind == "ball") {
      int res = 0;
      try {
        res = std::stoi(spec.substr(colon + 1));
      } catch (const std::exception&) {
        throw UsageError("bad mesh resolution in '" + spec + "'");
      }
      if (res < 1) throw UsageError("mesh resolution must be positive in '" + spec + "'");
      return generate_benchmark_mesh(parse_mesh_kind(kind), res);
    }
  }
  if (!fs::exists(spec)) throw UsageError("mesh file not found: " + spec);
  return read_mesh(spec);
}

std::vector<std::string> expand_meshes(const RunConfig& rc) {
  std::vector<std::string> out;
  for (const auto& m : rc.mesh) {
    if (m.find(':') == std::string::npos && !rc.res.empty() && !fs::exists(m)) {
      for (int r : rc.res) out.push_back(m + ":" + std::to_string(r));
    } else {
      out.push_back(m);
    }
  }
  return out;
}

SolverConfig solver_config(const RunConfig& rc, SymbolCache& cache) {
  SolverConfig c;
  c.s = rc.s;
  if (rc.rule != "default" && rc.rule != "strict") throw UsageError("--rule must be default or strict");
  c.overlay = OverlayOptions{rc.rule == "strict" ? SpacingRule::strict : SpacingRule::paper_default, rc.safety,
                             !rc.literal_spacing};
  if (rc.rhs != "grid" && rc.rhs != "mesh") throw UsageError("--rhs must be grid or mesh");
  c.rhs = rc.rhs == "grid" ? RhsMode::grid_rhs : RhsMode::mesh_rhs;
  if (rc.precond != "auto") {
    try {
      c.precond = parse_stencil_pattern(rc.precond);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }
  c.cg = CgOptions{rc.tol, rc.max_iter};
  c.cache = &cache;
  return c;
}

void check_dim(RunConfig& rc, const SimplicialMesh& mesh) {
  if (rc.dim == 0) rc.dim = mesh.dim();
  if (rc.dim != mesh.dim())
    throw UsageError("--dim " + std::to_string(rc.dim) + " does not match the " + std::to_string(mesh.dim()) + "D mesh");
}

void add_problem_options(CLI::App* cmd, RunConfig& rc) {
  cmd->add_option("--dim", rc.dim, "spatial dimension (inferred from the mesh when omitted)")->check(CLI::Range(1, 3));
  cmd->add_option("--s", rc.s, "fractional order")->check(open_unit);
  cmd->add_option("--k", rc.k, "Jacobi degree of the benchmark")->check(CLI::NonNegativeNumber);
  cmd->add_option("--mesh", rc.mesh, "kind:resolution or mesh file; comma separated lists allowed")->delimiter(',');
  cmd->add_option("--res", rc.res, "resolutions applied to bare mesh kinds")->delimiter(',');
  cmd->add_option("--rule", rc.rule, "grid spacing rule: default (h_FD = a_h) or strict");
  cmd->add_option("--safety", rc.safety, "grid half-width safety factor")->check(CLI::PositiveNumber);
  cmd->add_flag("--literal-spacing", rc.literal_spacing, "shrink h_FD to R/N instead of keeping the target spacing");
  cmd->add_option("--rhs", rc.rhs, "right-hand side assembly: grid or mesh");
  cmd->add_option("--precond", rc.precond, "auto, none, stencil3, stencil5, stencil9, stencil7, stencil27");
  cmd->add_option("--tol", rc.tol, "CG relative residual tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", rc.max_iter, "CG iteration limit");
}

std::string report_text(const RunConfig& rc, const SimplicialMesh& mesh, const FixedSolve& fs,
                        const std::optional<ErrorNorms>& err) {
  const auto& r = fs.result.report;
  std::string t;
  t += "dim=" + std::to_string(mesh.dim()) + "\n";
  t += "s=" + fmt(rc.s) + "\n";
  t += "k=" + std::to_string(rc.k) + "\n";
  t += "ne=" + std::to_string(mesh.num_elements()) + "\n";
  t += "nv=" + std::to_string(mesh.num_vertices()) + "\n";
  t += "grid_n=" + std::to_string(fs.grid.n) + "\n";
  t += "grid_nodes=" + std::to_string(fs.grid.nodes) + "\n";
  t += "h_fd=" + fmt(fs.grid.h_fd) + "\n";
  t += "iterations=" + std::to_string(r.iterations) + "\n";
  t += "converged=" + std::string(r.converged ? "true" : "false") + "\n";
  t += "relative_residual=" + fmt(r.residual_history.empty() ? 0.0 : r.residual_history.back()) + "\n";
  t += "precond_shift=" + fmt(fs.precond_shift) + "\n";
  if (!rc.no_timing) t += "seconds=" + fmt(r.seconds + fs.setup_seconds) + "\n";
  if (err) {
    t += "l2_error=" + fmt(err->l2) + "\n";
    t += "linf_error=" + fmt(err->linf) + "\n";
  }
  return t;
}

int cmd_symbol(const Globals& g, int dim, double s, int n, std::int64_t m, const std::string& method, int levels) {
  SymbolRequest req = default_symbol_request(dim, s, n);
  if (!method.empty()) {
    try {
      req.method = parse_symbol_method(method);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }
  if (req.method == SymbolMethod::analytic1d && dim != 1) throw UsageError("the analytic symbol exists only for --dim 1");
  if (req.method == SymbolMethod::filon && dim != 1) throw UsageError("Filon quadrature is one-dimensional");
  req.m = m;
  req.levels = levels;
  auto sym = compute_symbol(req);
  const fs::path dir = cache_dir(g);
  const fs::path file = dir / symbol_cache_name(req);
  fs::create_directories(dir);
  write_symbol_cache(file, sym);
  const int extent = sym.extent();
  for (std::size_t i = 0; i < std::min<std::size_t>(5, sym.values.size()); ++i) {
    std::vector<int> idx(dim);
    std::size_t rem = i;
    for (int r = dim - 1; r >= 0; --r) {
      idx[r] = static_cast<int>(rem % extent);
      rem /= extent;
    }
    std::string label;
    for (int r = 0; r < dim; ++r) label += (r ? "," : "") + std::to_string(idx[r]);
    std::printf("T(%s) = %s\n", label.c_str(), fmt(sym.values[i]).c_str());
  }
  std::printf("cache: %s\n", file.string().c_str());
  return ok;
}

int cmd_solve(const Globals& g, RunConfig rc) {
  if (rc.mesh.size() != 1) throw UsageError("solve needs exactly one --mesh");
  auto mesh = load_mesh(rc.mesh.front());
  check_dim(rc, mesh);
  auto problem = make_benchmark(rc.dim, rc.s, rc.k);
  SymbolCache cache(cache_dir(g));
  auto cfg = solver_config(rc, cache);
  auto res = solve_fractional_dirichlet(mesh, problem.rhs, cfg);
  std::optional<ErrorNorms> err;
  if (problem.exact) err = error_norms(mesh, res.result.solution, *problem.exact);
  const fs::path out(g.out);
  std::vector<double> exact;
  std::vector<VertexField> fields{{"u_h", res.result.solution}};
  if (problem.exact) {
    for (const auto& x : mesh.vertices()) exact.push_back((*problem.exact)(x));
    fields.emplace_back("u_exact", exact);
  }
  write_vtk(out / "solution.vtk", mesh, fields);
  const auto text = report_text(rc, mesh, res, err);
  write_text(out / "report.txt", text);
  std::fputs(text.c_str(), stdout);
  return res.result.report.converged ? ok : not_converged;
}

int cmd_converge(const Globals& g, RunConfig rc) {
  ConvergenceTable table;
  if (rc.synthetic) {
    for (int ne : {64, 128, 256, 512, 1024}) {
      const double h = 1.0 / ne;
      table.rows.push_back({static_cast<std::size_t>(ne), h, 0.5 * h * h, 2.0 * h * h, 0, 0.0, true});
    }
    table.sort_and_fit();
  } else {
    auto specs = expand_meshes(rc);
    if (specs.size() < 3) throw UsageError("converge needs at least three meshes");
    std::vector<SimplicialMesh> meshes;
    for (const auto& spec : specs) {
      meshes.push_back(load_mesh(spec));
      check_dim(rc, meshes.back());
    }
    SymbolCache cache(cache_dir(g));
    table = convergence_study(make_benchmark(rc.dim, rc.s, rc.k), meshes, solver_config(rc, cache));
    if (rc.no_timing)
      for (auto& r : table.rows) r.seconds = 0;
  }
  const auto csv = format_convergence_csv(table);
  write_text(fs::path(g.out) / "convergence.csv", csv);
  std::fputs(csv.c_str(), stdout);
  return table.all_converged() ? ok : not_converged;
}

int cmd_adapt(const Globals& g, RunConfig rc) {
  if (rc.mesh.size() != 1) throw UsageError("adapt needs exactly one --mesh");
  auto mesh = load_mesh(rc.mesh.front());
  check_dim(rc, mesh);
  SymbolCache cache(cache_dir(g));
  AdaptConfig cfg;
  cfg.l_max = rc.lmax;
  cfg.mmpde.tau = rc.tau;
  cfg.mmpde.boundary = rc.slide ? BoundaryMotion::slide_straight : BoundaryMotion::fixed;
  cfg.solver = solver_config(rc, cache);
  auto problem = make_benchmark(rc.dim, rc.s, rc.k);
  auto res = adapt_loop(problem, mesh, cfg);

  const fs::path out(g.out);
  for (std::size_t l = 0; l < res.meshes.size(); ++l)
    write_vtk(out / ("adapt_mesh_" + std::to_string(l) + ".vtk"), res.meshes[l], {});
  std::vector<VertexField> fields{{"u_h", res.solution}};
  write_vtk(out / "adapt_solution.vtk", res.mesh, fields);
  write_mesh(out / "adapt_final.mesh", res.mesh);

  std::string csv = "round,ne,h_bar,a_h,l2_error,linf_error,iterations,alpha,steps_accepted,steps_rejected,energy_initial,energy_final,stalled,quality_flag\n";
  for (const auto& r : res.rounds) {
    csv += std::to_string(r.index) + ',' + std::to_string(r.ne) + ',' + fmt(r.stats.h_bar) + ',' + fmt(r.stats.a_h) +
           ',' + fmt(r.errors ? r.errors->l2 : NAN) + ',' + fmt(r.errors ? r.errors->linf : NAN) + ',' +
           std::to_string(r.solve.iterations) + ',' + fmt(r.alpha) + ',' + std::to_string(r.steps_accepted) + ',' +
           std::to_string(r.steps_rejected) + ',' + fmt(r.energy_initial) + ',' + fmt(r.energy_final) + ',' +
           (r.stalled ? "1" : "0") + ',' + (r.quality_flag ? "1" : "0") + '\n';
  }
  const auto stats = mesh_stats(res.mesh);
  csv += "final," + std::to_string(res.mesh.num_elements()) + ',' + fmt(stats.h_bar) + ',' + fmt(stats.a_h) + ',' +
         fmt(res.final_errors ? res.final_errors->l2 : NAN) + ',' +
         fmt(res.final_errors ? res.final_errors->linf : NAN) + ',' + std::to_string(res.final_solve.iterations) +
         ",,,,,," + (res.stalled ? "1" : "0") + ",\n";
  write_text(out / "adapt.csv", csv);
  std::fputs(csv.c_str(), stdout);
  if (res.stalled) {
    std::fprintf(stderr, "mesh motion stalled; best mesh so far written\n");
    return stalled;
  }
  return res.solver_failed ? not_converged : ok;
}

int cmd_check(const Globals& g, const std::string& suite) {
  std::vector<CheckResult> results;
  try {
    results = run_checks(suite, g.seed);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidParameter) throw UsageError(e.what());
    throw;
  }
  bool all = true;
  for (const auto& r : results) {
    all = all && r.passed;
    std::printf("%-4s  %-13s %-72s %s\n", r.passed ? "PASS" : "FAIL", r.suite.c_str(), r.name.c_str(), r.detail.c_str());
  }
  std::printf("%zu checks, %s\n", results.size(), all ? "all passed" : "FAILURES");
  return all ? ok : numeric;
}

int exit_code(const Error& e) {
  switch (e.code()) {
    case ErrorCode::NotConverged: return not_converged;
    case ErrorCode::MeshMotionStalled: return stalled;
    case ErrorCode::InvalidParameter:
    case ErrorCode::UnknownMeshKind:
    case ErrorCode::ParseError:
    case ErrorCode::IoError: return usage;
    default: return numeric;
  }
}

// Appends key=value pairs from --config as flags the command line did not already set.
std::vector<std::string> merge_config(CLI::App& app, std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  CLI::App* sub = nullptr;
  for (const auto& a : args) {
    if (a.empty() || a.front() == '-') continue;
    if (auto* s = app.get_subcommand_no_throw(a)) {
      sub = s;
      break;
    }
  }
  std::map<std::string, std::string> cfg;
  try {
    cfg = read_config(path);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  for (const auto& [key, value] : cfg) {
    const std::string flag = "--" + key;
    bool given = false;
    for (const auto& a : args) given = given || a == flag || a.rfind(flag + "=", 0) == 0;
    if (given) continue;
    const CLI::Option* opt = sub ? sub->get_option_no_throw(flag) : nullptr;
    if (!opt) opt = app.get_option_no_throw(flag);
    if (!opt) continue;
    args.push_back(flag + "=" + value);
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid-overlay finite difference solver for the fractional Laplacian"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--out", g.out, "output directory");
  app.add_option("--seed", g.seed, "seed for randomized checks");
  app.add_option("--config", g.config, "key=value file; command-line flags take precedence");

  int sym_dim = 1, sym_n = 8, sym_levels = 2;
  double sym_s = 0.5;
  std::int64_t sym_m = 0;
  std::string sym_method;
  auto* symbol = app.add_subcommand("symbol", "compute and cache Toeplitz coefficients");
  symbol->add_option("--dim", sym_dim, "dimension")->check(CLI::Range(1, 3));
  symbol->add_option("--s", sym_s, "fractional order")->check(open_unit);
  symbol->add_option("--n", sym_n, "grid half-width N")->check(CLI::NonNegativeNumber);
  symbol->add_option("--m", sym_m, "quadrature points (0 = default)")->check(CLI::NonNegativeNumber);
  symbol->add_option("--method", sym_method, "analytic, trapezoid, filon or richardson");
  symbol->add_option("--levels", sym_levels, "Richardson levels")->check(CLI::Range(2, 8));

  RunConfig solve_rc, conv_rc, adapt_rc;
  auto* solve = app.add_subcommand("solve", "solve the benchmark problem on one mesh");
  add_problem_options(solve, solve_rc);
  solve->add_flag("--no-timing", solve_rc.no_timing, "omit wall times from outputs");

  auto* converge = app.add_subcommand("converge", "convergence study over a list of meshes");
  add_problem_options(converge, conv_rc);
  converge->add_flag("--synthetic", conv_rc.synthetic, "replay canned second-order errors");
  converge->add_flag("--no-timing", conv_rc.no_timing, "write 0 in the seconds column");

  auto* adapt = app.add_subcommand("adapt", "adaptive solve with MMPDE mesh motion");
  add_problem_options(adapt, adapt_rc);
  adapt->add_option("--lmax", adapt_rc.lmax, "solve + move rounds")->check(CLI::PositiveNumber);
  adapt->add_option("--tau", adapt_rc.tau, "MMPDE time scale")->check(CLI::PositiveNumber);
  adapt->add_flag("--slide", adapt_rc.slide, "let boundary vertices slide along straight boundary pieces");

  std::string suite = "all";
  auto* check = app.add_subcommand("check", "run the oracle and property suites");
  check->add_option("--suite", suite, "all, toeplitz, symbol, definiteness, transfer, rank or mmpde");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = merge_config(app, std::move(args));
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return usage;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return usage;
  }

  try {
    if (*symbol) return cmd_symbol(g, sym_dim, sym_s, sym_n, sym_m, sym_method, sym_levels);
    if (*solve) return cmd_solve(g, solve_rc);
    if (*converge) return cmd_converge(g, conv_rc);
    if (*adapt) return cmd_adapt(g, adapt_rc);
    if (*check) return cmd_check(g, suite);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return usage;
  } catch (const RankDeficiencyError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return numeric;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return numeric;
  }
  return usage;
}
