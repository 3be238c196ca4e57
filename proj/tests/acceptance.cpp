// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit when any gated criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "gofd/adaptivity.hpp"
#include "gofd/checks.hpp"
#include "gofd/error.hpp"
#include "gofd/problems.hpp"
#include "gofd/solver.hpp"

using namespace gofd;

namespace {

constexpr std::uint64_t kSeed = 20240611;

struct Outcome {
  bool passed = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

bool run(int id, const std::string& title, double limit_seconds, const std::function<Outcome()>& body,
         bool gated = true) {
  auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double sec = std::chrono::duration<double>(Clock::now() - t0).count();
  const bool in_time = sec <= limit_seconds;
  const bool ok = o.passed && in_time;
  std::ostringstream line;
  line << (gated ? (ok ? "PASS" : "FAIL") : (ok ? "SOFT-PASS" : "SOFT-FAIL")) << " [" << id << "] " << title << " ("
       << std::fixed;
  line.precision(1);
  line << sec << " s of " << limit_seconds << " s";
  if (!in_time) line << ", over time";
  line << "): " << o.detail;
  std::puts(line.str().c_str());
  std::fflush(stdout);
  return ok || !gated;
}

Outcome from_checks(const std::vector<CheckResult>& results) {
  Outcome o{true, ""};
  int failed = 0;
  for (const auto& r : results)
    if (!r.passed) {
      o.passed = false;
      if (failed++ < 3) o.detail += r.name + ": " + r.detail + "; ";
    }
  o.detail += std::to_string(results.size() - failed) + "/" + std::to_string(results.size()) + " checks passed";
  return o;
}

std::string fmt(double v, int prec = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

Outcome uniform_1d() {
  Outcome o{true, ""};
  for (double s : {0.25, 0.5, 0.75}) {
    auto p = make_benchmark(1, s, 0);
    std::vector<SimplicialMesh> meshes;
    for (int n : {64, 128, 256, 512, 1024}) meshes.push_back(generate_benchmark_mesh(MeshKind::interval, n));
    SolverConfig cfg;
    cfg.s = s;
    auto t = convergence_study(p, meshes, cfg);
    const double want_l2 = std::min(1.0, s + 0.5);
    const bool ok = t.all_converged() && std::abs(t.slope_linf - s) <= 0.15 && std::abs(t.slope_l2 - want_l2) <= 0.15;
    o.passed = o.passed && ok;
    o.detail += "s=" + fmt(s) + ": linf " + fmt(t.slope_linf) + " (want " + fmt(s) + "), l2 " + fmt(t.slope_l2) +
                " (want " + fmt(want_l2) + "); ";
  }
  return o;
}

Outcome adaptive_1d() {
  Outcome o{true, ""};
  for (double s : {0.25, 0.5}) {
    auto p = make_benchmark(1, s, 0);
    SolverConfig sc;
    sc.s = s;
    AdaptConfig ac;
    ac.l_max = 5;
    ac.solver = sc;
    std::vector<double> h, err;
    bool beats = true, clean = true;
    for (int n : {64, 128, 256, 512}) {
      auto mesh = generate_benchmark_mesh(MeshKind::interval, n);
      auto uni = solve_fractional_dirichlet(mesh, p.rhs, sc);
      const double eu = error_norms(mesh, uni.result.solution, *p.exact).l2;
      auto r = adapt_loop(p, mesh, ac);
      clean = clean && !r.stalled && !r.solver_failed && r.final_errors.has_value();
      const double ea = r.final_errors ? r.final_errors->l2 : INFINITY;
      beats = beats && ea < eu;
      h.push_back(mesh_stats(r.mesh).h_bar);
      err.push_back(ea);
    }
    const double slope = fit_slope(h, err);
    const bool ok = clean && beats && slope >= 1.7;
    o.passed = o.passed && ok;
    o.detail += "s=" + fmt(s) + ": l2 slope " + fmt(slope) + (beats ? ", adapted < uniform" : ", adapted NOT < uniform") +
                (clean ? "" : ", stall or solver failure") + "; ";
  }
  return o;
}

Outcome disk_2d() {
  const double s = 0.5;
  auto p = make_benchmark(2, s, 0);
  SymbolCache cache;
  SolverConfig cfg;
  cfg.s = s;
  cfg.cache = &cache;
  std::vector<double> h, l2;
  std::string rows;
  // largest first so the cached symbol serves every smaller grid
  for (int n : {58, 29, 16, 8}) {
    auto mesh = generate_benchmark_mesh(MeshKind::disk, n);
    auto r = solve_fractional_dirichlet(mesh, p.rhs, cfg);
    if (!r.result.report.converged) return {false, "CG did not converge at N_e=" + std::to_string(mesh.num_elements())};
    h.push_back(mesh_stats(mesh).h_bar);
    l2.push_back(error_norms(mesh, r.result.solution, *p.exact).l2);
    rows += std::to_string(mesh.num_elements()) + ":" + fmt(l2.back()) + " ";
  }
  const double slope = fit_slope(h, l2);
  return {slope >= 0.8 && slope <= 1.2, "l2 slope " + fmt(slope) + " over N_e " + rows};
}

Outcome preconditioner() {
  const double s = 0.9;
  auto p = make_benchmark(2, s, 0);
  auto mesh = generate_benchmark_mesh(MeshKind::disk, 41);
  SymbolCache cache;
  SolverConfig cfg;
  cfg.s = s;
  cfg.cache = &cache;
  cfg.cg.tol = 1e-10;
  cfg.cg.max_iter = 20000;
  cfg.precond = StencilPattern::stencil9;
  auto pre = solve_fractional_dirichlet(mesh, p.rhs, cfg);
  cfg.precond = StencilPattern::none;
  auto plain = solve_fractional_dirichlet(mesh, p.rhs, cfg);
  double diff = 0, norm = 0;
  for (std::size_t i = 0; i < plain.result.solution.size(); ++i) {
    const double a = plain.result.solution[i], b = pre.result.solution[i];
    diff += (a - b) * (a - b);
    norm += a * a;
  }
  const double rel = std::sqrt(diff / norm);
  const auto ip = pre.result.report.iterations, iu = plain.result.report.iterations;
  const bool ok = pre.result.report.converged && plain.result.report.converged && 2 * ip <= iu && rel <= 1e-8;
  return {ok, "N_e=" + std::to_string(mesh.num_elements()) + ", iterations " + std::to_string(ip) + " vs " +
                  std::to_string(iu) + " (" + fmt(100.0 * ip / iu) + "%), relative difference " + fmt(rel)};
}

Outcome adaptive_2d_soft() {
  const double s = 0.5;
  auto p = make_benchmark(2, s, 0);
  SymbolCache cache;
  SolverConfig sc;
  sc.s = s;
  sc.cache = &cache;
  AdaptConfig ac;
  ac.l_max = 3;
  ac.solver = sc;
  ac.mmpde.max_steps = 300;
  std::vector<double> h, err;
  std::string rows;
  for (int n : {12, 8, 6}) {
    auto r = adapt_loop(p, generate_benchmark_mesh(MeshKind::disk, n), ac);
    if (!r.final_errors) return {false, "no error estimate"};
    h.push_back(mesh_stats(r.mesh).h_bar);
    err.push_back(r.final_errors->l2);
    rows += std::to_string(r.mesh.num_elements()) + ":" + fmt(err.back()) + (r.stalled ? "(stalled)" : "") + " ";
  }
  const double slope = fit_slope(h, err);
  return {slope >= 1.7, "l2 slope " + fmt(slope) + " (second order hoped for) over N_e " + rows};
}

Outcome ball_3d_soft() {
  const double s = 0.5;
  auto p = make_benchmark(3, s, 0);
  SymbolCache cache;
  SolverConfig cfg;
  cfg.s = s;
  cfg.cache = &cache;
  std::vector<double> h, l2;
  std::string rows;
  for (int n : {6, 4, 3}) {
    auto mesh = generate_benchmark_mesh(MeshKind::ball, n);
    auto r = solve_fractional_dirichlet(mesh, p.rhs, cfg);
    h.push_back(mesh_stats(mesh).h_bar);
    l2.push_back(error_norms(mesh, r.result.solution, *p.exact).l2);
    rows += std::to_string(mesh.num_elements()) + ":" + fmt(l2.back()) + " ";
  }
  const double slope = fit_slope(h, l2);
  return {slope >= 0.8, "uniform l2 slope " + fmt(slope) + " over N_e " + rows};
}

}  // namespace

int main() {
  bool ok = true;
  ok &= run(1, "Toeplitz FFT apply matches dense matrix", 10, [] { return from_checks(check_toeplitz(kSeed)); });
  ok &= run(2, "symbol quadratures match the closed form", 5, [] { return from_checks(check_symbol()); });
  ok &= run(3, "dense A_FD is positive definite", 5, [] { return from_checks(check_definiteness()); });
  ok &= run(4, "transfer matrix properties on 50 random pairs", 20, [] { return from_checks(check_transfer(kSeed, 50)); });
  ok &= run(5, "strict spacing gives full column rank", 30, [] { return from_checks(check_rank(kSeed, 20)); });
  ok &= run(6, "1D uniform convergence rates", 120, uniform_1d);
  ok &= run(7, "1D adaptive second-order convergence", 300, adaptive_1d);
  ok &= run(8, "2D disk first-order convergence", 900, disk_2d);
  ok &= run(9, "stencil9 IC(1) halves CG iterations", 300, preconditioner);
  ok &= run(10, "mesh motion properties", 120, [] { return from_checks(check_mmpde(kSeed)); });
  run(11, "2D adaptive convergence", 900, adaptive_2d_soft, false);
  run(12, "3D ball convergence", 900, ball_3d_soft, false);
  std::puts(ok ? "ACCEPTANCE: all gated criteria passed" : "ACCEPTANCE: some gated criteria failed");
  return ok ? 0 : 1;
}
