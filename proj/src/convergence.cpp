#include <algorithm>
#include <cmath>
#include <limits>

#include "gofd/error.hpp"
#include "gofd/problems.hpp"

namespace gofd {

double fit_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorCode::ParameterMismatch, "slope fit needs equal-length samples");
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0, my = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

void ConvergenceTable::sort_and_fit() {
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.ne < b.ne; });
  std::vector<double> h, l2, linf;
  for (const auto& r : rows) {
    h.push_back(r.h_bar);
    l2.push_back(r.l2);
    linf.push_back(r.linf);
  }
  slope_l2 = fit_slope(h, l2);
  slope_linf = fit_slope(h, linf);
}

bool ConvergenceTable::all_converged() const {
  return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.converged; });
}

ConvergenceTable convergence_study(const BenchmarkProblem& problem, const std::vector<SimplicialMesh>& meshes,
                                   const SolverConfig& config) {
  if (meshes.size() < 3) fail(ErrorCode::InvalidParameter, "a convergence study needs at least three meshes");
  if (!problem.exact) fail(ErrorCode::InvalidParameter, "convergence study needs an exact solution");
  ConvergenceTable table;
  for (const auto& mesh : meshes) {
    auto run = solve_fractional_dirichlet(mesh, problem.rhs, config);
    auto err = error_norms(mesh, run.result.solution, *problem.exact);
    ConvergenceRow row;
    row.ne = mesh.num_elements();
    row.h_bar = mesh_stats(mesh).h_bar;
    row.l2 = err.l2;
    row.linf = err.linf;
    row.iterations = run.result.report.iterations;
    row.seconds = run.setup_seconds + run.result.report.seconds;
    row.converged = run.result.report.converged;
    table.rows.push_back(row);
  }
  table.sort_and_fit();
  return table;
}

}  // namespace gofd
