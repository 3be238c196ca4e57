#include <utility>

#include "gofd/adaptivity.hpp"
#include "gofd/error.hpp"

namespace gofd {

namespace {

struct RoundSolve {
  FixedSolve solve;
  std::optional<ErrorNorms> errors;
};

RoundSolve solve_on(const BenchmarkProblem& problem, const SimplicialMesh& mesh, const SolverConfig& config) {
  RoundSolve out{solve_fractional_dirichlet(mesh, problem.rhs, config), std::nullopt};
  if (problem.exact) {
    out.errors = error_norms(mesh, out.solve.result.solution, *problem.exact);
    out.solve.result.report.l2_error = out.errors->l2;
    out.solve.result.report.linf_error = out.errors->linf;
  }
  return out;
}

}  // namespace

AdaptResult adapt_loop(const BenchmarkProblem& problem, const SimplicialMesh& initial, const AdaptConfig& config) {
  if (config.l_max < 0) fail(ErrorCode::InvalidParameter, "l_max must be non-negative");
  if (problem.dim != initial.dim()) fail(ErrorCode::ParameterMismatch, "problem and mesh dimensions differ");
  SolverConfig solver = config.solver;
  solver.s = problem.s;

  AdaptResult res;
  SimplicialMesh mesh = initial;
  for (int l = 0; l < config.l_max; ++l) {
    res.meshes.push_back(mesh);
    AdaptRound round;
    round.index = l;
    round.ne = mesh.num_elements();
    round.stats = mesh_stats(mesh);
    auto rs = solve_on(problem, mesh, solver);
    round.grid = rs.solve.grid;
    round.solve = rs.solve.result.report;
    round.errors = rs.errors;
    if (!round.solve.converged) {
      res.rounds.push_back(std::move(round));
      res.mesh = mesh;
      res.solution = rs.solve.result.solution;
      res.final_solve = rs.solve.result.report;
      res.final_errors = rs.errors;
      res.final_grid = rs.solve.grid;
      res.solver_failed = true;
      return res;
    }
    auto hessian = recover_hessian(mesh, rs.solve.result.solution);
    auto metric = metric_from_hessian(mesh, hessian);
    round.alpha = metric.alpha;
    auto moved = integrate_mmpde(mesh, metric, config.mmpde);
    round.steps_accepted = moved.accepted;
    round.steps_rejected = moved.rejected;
    round.energy_initial = moved.energy_history.front();
    round.energy_final = moved.energy_history.back();
    round.stalled = moved.stalled;
    round.quality_flag = moved.quality_flag;
    res.rounds.push_back(std::move(round));
    if (moved.stalled) {
      res.stalled = true;
      res.mesh = mesh;
      res.solution = rs.solve.result.solution;
      res.final_solve = rs.solve.result.report;
      res.final_errors = rs.errors;
      res.final_grid = rs.solve.grid;
      return res;
    }
    mesh = std::move(moved.mesh);
  }
  res.meshes.push_back(mesh);
  auto rs = solve_on(problem, mesh, solver);
  res.mesh = mesh;
  res.solution = rs.solve.result.solution;
  res.final_solve = rs.solve.result.report;
  res.final_errors = rs.errors;
  res.final_grid = rs.solve.grid;
  res.solver_failed = !res.final_solve.converged;
  return res;
}

}  // namespace gofd
