#include "gofd/solver.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "gofd/error.hpp"

namespace gofd {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

GofdOperator::GofdOperator(ToeplitzOperator toeplitz, TransferMatrix transfer, InteriorTransfer interior, double s)
    : toeplitz_(std::move(toeplitz)), transfer_(std::move(transfer)), interior_(std::move(interior)), s_(s) {
  if (transfer_.rows() != toeplitz_.size() || interior_.matrix.rows() != toeplitz_.size())
    fail(ErrorCode::ParameterMismatch, "transfer rows differ from grid size");
}

void GofdOperator::apply(std::span<const double> v, std::span<double> out) const {
  if (v.size() != size() || out.size() != size()) fail(ErrorCode::ParameterMismatch, "interior vector length mismatch");
  std::vector<double> g(toeplitz_.size()), ag(toeplitz_.size());
  interior_.matrix.apply(v, g);
  toeplitz_.apply(g, ag);
  interior_.matrix.apply_transpose(ag, out);
}

std::vector<double> GofdOperator::apply(std::span<const double> v) const {
  std::vector<double> out(size());
  apply(v, out);
  return out;
}

std::vector<double> sample_on_grid(const GofdOperator& op, const ScalarField& f) {
  const auto& tm = op.transfer();
  std::vector<double> fg(tm.rows(), 0.0);
  for (std::size_t k = 0; k < tm.rows(); ++k)
    if (tm.row_ptr()[k + 1] > tm.row_ptr()[k]) fg[k] = f(op.grid().node(k));
  return fg;
}

std::vector<double> assemble_rhs(const GofdOperator& op, const SimplicialMesh& mesh, const ScalarField& f,
                                 RhsMode mode) {
  const double scale = std::pow(op.h_fd(), 2 * op.s());
  const auto& it = op.interior();
  std::vector<double> b(op.size());
  if (mode == RhsMode::grid_rhs) {
    auto fg = sample_on_grid(op, f);
    it.matrix.apply_transpose(fg, b);
    for (double& v : b) v *= scale;
  } else {
    const auto& d = op.transfer().column_sums();
    for (std::size_t i = 0; i < b.size(); ++i) {
      int j = it.interior_to_global[i];
      b[i] = scale * d[j] * f(mesh.vertex(j));
    }
  }
  return b;
}

CgResult solve_cg(const GofdOperator& op, std::span<const double> rhs, const CgOptions& options,
                  const SparsePreconditioner* precond) {
  if (!(options.tol > 0)) fail(ErrorCode::InvalidParameter, "CG tolerance must be positive");
  const std::size_t n = op.size();
  if (rhs.size() != n) fail(ErrorCode::ParameterMismatch, "right-hand side length mismatch");
  auto t0 = std::chrono::steady_clock::now();
  CgResult res;
  res.interior.assign(n, 0.0);
  auto& rep = res.report;
  const double bnorm = std::sqrt(dot(rhs, rhs));
  rep.residual_history.push_back(bnorm > 0 ? 1.0 : 0.0);
  if (bnorm == 0) {
    rep.converged = true;
    res.solution = op.interior().scatter(res.interior);
    rep.seconds = seconds_since(t0);
    return res;
  }
  std::vector<double> x(n, 0.0), r(rhs.begin(), rhs.end()), z, p, ap(n);
  auto precondition = [&](const std::vector<double>& v) { return precond ? precond->apply(v) : v; };
  z = precondition(r);
  p = z;
  double rz = dot(r, z);
  double best = 1.0;
  for (std::size_t k = 0; k < options.max_iter; ++k) {
    op.apply(p, ap);
    const double alpha = rz / dot(p, ap);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    const double rel = std::sqrt(dot(r, r)) / bnorm;
    rep.residual_history.push_back(rel);
    rep.iterations = k + 1;
    if (rel < best) {
      best = rel;
      res.interior = x;
    }
    if (rel <= options.tol) {
      rep.converged = true;
      break;
    }
    z = precondition(r);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  res.solution = op.interior().scatter(res.interior);
  rep.seconds = seconds_since(t0);
  return res;
}

std::vector<double> local_truncation_error(const GofdOperator& op, std::span<const double> exact_u,
                                           std::span<const double> f_grid) {
  if (f_grid.size() != op.toeplitz().size()) fail(ErrorCode::ParameterMismatch, "grid vector length mismatch");
  auto iu = op.transfer().apply(exact_u);
  auto au = op.toeplitz().apply_fractional(iu, op.h_fd(), op.s());
  std::vector<double> tau(f_grid.size());
  for (std::size_t k = 0; k < tau.size(); ++k) tau[k] = f_grid[k] - au[k];
  return tau;
}

GofdOperator build_gofd_operator(const SimplicialMesh& mesh, const SolverConfig& config) {
  if (!(config.s > 0 && config.s <= 1)) fail(ErrorCode::InvalidOrder, "order s must lie in (0, 1]");
  auto stats = mesh_stats(mesh);
  auto grid = build_overlay(stats, bounding_box(mesh), config.overlay);
  auto req = default_symbol_request(mesh.dim(), config.s, grid.n());
  req.m = config.symbol_m;
  auto symbol = config.cache ? config.cache->get(req) : compute_symbol(req);
  auto tm = build_transfer(mesh, grid);
  auto interior = restrict_interior(tm, mesh);
  std::vector<std::size_t> empty;
  const auto& cs = interior.matrix.column_sums();
  for (std::size_t i = 0; i < cs.size(); ++i)
    if (!(cs[i] > 0)) empty.push_back(static_cast<std::size_t>(interior.interior_to_global[i]));
  if (!empty.empty())
    throw RankDeficiencyError(empty, std::to_string(empty.size()) + " interior vertices see no overlay grid node");
  ToeplitzOperator top(grid, symbol);
  return GofdOperator(std::move(top), std::move(tm), std::move(interior), config.s);
}

FixedSolve solve_fractional_dirichlet(const SimplicialMesh& mesh, const ScalarField& f, const SolverConfig& config) {
  auto t0 = std::chrono::steady_clock::now();
  auto op = build_gofd_operator(mesh, config);
  auto b = assemble_rhs(op, mesh, f, config.rhs);
  StencilPattern pattern = config.precond.value_or(default_pattern(mesh.dim()));
  std::optional<SparsePreconditioner> pc;
  if (pattern != StencilPattern::none) {
    auto ap = extract_sparse_pattern(op.toeplitz().symbol(), op.grid(), pattern);
    pc = build_preconditioner(ap, op.interior().matrix, pattern);
  }
  FixedSolve out;
  out.setup_seconds = seconds_since(t0);
  out.result = solve_cg(op, b, config.cg, pc ? &*pc : nullptr);
  out.precond_shift = pc ? pc->shift() : 0.0;
  out.grid = {op.grid().n(), op.h_fd(), op.grid().half_width(), op.grid().num_nodes()};
  return out;
}

}  // namespace gofd
