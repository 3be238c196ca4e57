#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gofd/error.hpp"
#include "gofd/problems.hpp"
#include "gofd/solver.hpp"

using namespace gofd;
using doctest::Approx;

namespace {

Eigen::MatrixXd dense_system(const GofdOperator& op) {
  const auto n = static_cast<Eigen::Index>(op.size());
  Eigen::MatrixXd a(n, n);
  std::vector<double> e(op.size(), 0.0);
  for (Eigen::Index j = 0; j < n; ++j) {
    e[j] = 1;
    auto col = op.apply(e);
    for (Eigen::Index i = 0; i < n; ++i) a(i, j) = col[i];
    e[j] = 0;
  }
  return a;
}

SolverConfig config(double s) {
  SolverConfig c;
  c.s = s;
  c.cg.tol = 1e-12;
  return c;
}

}  // namespace

TEST_CASE("system operator is symmetric and agrees with a dense oracle") {
  for (auto kind : {MeshKind::interval, MeshKind::disk}) {
    auto m = generate_benchmark_mesh(kind, kind == MeshKind::interval ? 40 : 4);
    auto op = build_gofd_operator(m, config(0.4));
    REQUIRE(op.size() <= 60);
    auto a = dense_system(op);
    CHECK((a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * a.cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()));
    CHECK(es.eigenvalues().minCoeff() > 0);

    // I^T A_FD I from the dense Toeplitz matrix
    auto t = dense_materialize(op.toeplitz().symbol(), op.grid().n(), 1 << 14);
    Eigen::MatrixXd in = Eigen::MatrixXd(to_sparse(op.interior().matrix));
    Eigen::MatrixXd ref = in.transpose() * t * in;
    CHECK((a - ref).cwiseAbs().maxCoeff() <= 1e-11 * ref.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("conjugate gradients") {
  auto m = generate_benchmark_mesh(MeshKind::interval, 32);
  auto op = build_gofd_operator(m, config(0.5));
  std::vector<double> zero(op.size(), 0.0);
  auto z = solve_cg(op, zero);
  CHECK(z.report.converged);
  CHECK(z.report.iterations == 0);
  for (double v : z.solution) CHECK(v == 0.0);

  auto b = assemble_rhs(op, m, [](const Point&) { return 1.0; }, RhsMode::grid_rhs);
  auto r = solve_cg(op, b, {1e-12, 1000});
  CHECK(r.report.converged);
  auto a = dense_system(op);
  Eigen::Map<const Eigen::VectorXd> bm(b.data(), static_cast<Eigen::Index>(b.size()));
  Eigen::VectorXd x = a.ldlt().solve(bm);
  for (std::size_t i = 0; i < op.size(); ++i) CHECK(r.interior[i] == Approx(x(static_cast<Eigen::Index>(i))).epsilon(1e-9));
  CHECK(r.solution.front() == 0.0);
  CHECK(r.solution.back() == 0.0);
  for (std::size_t k = 1; k < r.report.residual_history.size(); ++k) CHECK(r.report.residual_history[k] >= 0);

  CHECK_THROWS_AS(solve_cg(op, std::vector<double>(3)), Error);
  CHECK_THROWS_AS(solve_cg(op, b, {0.0, 10}), Error);
}

TEST_CASE("right-hand side scales with the grid spacing") {
  auto m = generate_benchmark_mesh(MeshKind::interval, 16);
  auto op = build_gofd_operator(m, config(0.3));
  auto one = [](const Point&) { return 1.0; };
  auto bg = assemble_rhs(op, m, one, RhsMode::grid_rhs);
  auto bm = assemble_rhs(op, m, one, RhsMode::mesh_rhs);
  const double scale = std::pow(op.h_fd(), 0.6);
  for (std::size_t i = 0; i < bg.size(); ++i) {
    const int j = op.interior().interior_to_global[i];
    CHECK(bg[i] == Approx(scale * op.interior().matrix.column_sums()[i]).epsilon(1e-12));
    CHECK(bm[i] == Approx(scale * op.transfer().column_sums()[j]).epsilon(1e-12));
  }
}

TEST_CASE("incomplete Cholesky on a 1D Laplacian is exact") {
  const int n = 20;
  SparseMatrix a(n, n);
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, 2.0);
    if (i > 0) t.emplace_back(i, i - 1, -1.0);
    if (i + 1 < n) t.emplace_back(i, i + 1, -1.0);
  }
  a.setFromTriplets(t.begin(), t.end());
  auto ic = incomplete_cholesky(a, 0, 0.0, 0);
  CHECK(ic.shift == 0.0);
  std::vector<double> b(n, 1.0), x = b;
  ic.solve_in_place(x);
  Eigen::Map<const Eigen::VectorXd> xm(x.data(), n);
  Eigen::VectorXd r = a * xm;
  for (int i = 0; i < n; ++i) CHECK(r(i) == Approx(1.0).epsilon(1e-12));

  auto fill = level_fill_pattern(a, 1);
  for (int i = 0; i < n; ++i) CHECK(fill[i].back() == i);
}

TEST_CASE("preconditioning preserves the solution") {
  auto m = generate_benchmark_mesh(MeshKind::disk, 8);
  auto cfg = config(0.7);
  auto op = build_gofd_operator(m, cfg);
  auto b = assemble_rhs(op, m, [](const Point& x) { return 1 + x[0]; }, RhsMode::grid_rhs);
  auto pat = extract_sparse_pattern(op.toeplitz().symbol(), op.grid(), StencilPattern::stencil5);
  auto pc = build_preconditioner(pat, op.interior().matrix, StencilPattern::stencil5);
  auto plain = solve_cg(op, b, {1e-11, 2000});
  auto pre = solve_cg(op, b, {1e-11, 2000}, &pc);
  REQUIRE(plain.report.converged);
  REQUIRE(pre.report.converged);
  CHECK(pre.report.iterations < plain.report.iterations);
  double diff = 0, norm = 0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    diff = std::max(diff, std::abs(plain.interior[i] - pre.interior[i]));
    norm = std::max(norm, std::abs(plain.interior[i]));
  }
  CHECK(diff <= 1e-8 * norm);
}

TEST_CASE("stencil patterns") {
  CHECK(parse_stencil_pattern("stencil9") == StencilPattern::stencil9);
  CHECK(pattern_dim(StencilPattern::stencil27) == 3);
  CHECK(default_pattern(1) == StencilPattern::stencil3);
  CHECK_THROWS_AS(parse_stencil_pattern("stencil4"), Error);
  auto sym = symbol_1d_analytic(0.5, 3);
  OverlayGrid g(1, {0, 0, 0}, 3, 1.0);
  auto p = extract_sparse_pattern(sym, g, StencilPattern::stencil3);
  CHECK(p.coeff(3, 3) == Approx(sym.at({0, 0, 0})));
  CHECK(p.coeff(3, 4) == Approx(sym.at({1, 0, 0})));
  CHECK(p.coeff(3, 5) == 0.0);
}

TEST_CASE("local truncation error vanishes for the discrete solution image") {
  auto m = generate_benchmark_mesh(MeshKind::interval, 24);
  auto op = build_gofd_operator(m, config(0.5));
  std::vector<double> u(m.num_vertices());
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = 1 - m.vertex(j)[0] * m.vertex(j)[0];
  auto iu = op.transfer().apply(u);
  auto f = op.toeplitz().apply_fractional(iu, op.h_fd(), op.s());
  auto tau = local_truncation_error(op, u, f);
  for (double t : tau) CHECK(std::abs(t) < 1e-12);
}

TEST_CASE("one dimensional benchmark solve") {
  auto p = make_benchmark(1, 0.5, 0);
  auto m = generate_benchmark_mesh(MeshKind::interval, 128);
  auto res = solve_fractional_dirichlet(m, p.rhs, config(0.5));
  CHECK(res.result.report.converged);
  auto e = error_norms(m, res.result.solution, *p.exact);
  CHECK(e.l2 < 2e-2);
  CHECK(res.grid.h_fd <= mesh_stats(m).a_h);
  SolverConfig bad = config(1.5);
  CHECK_THROWS_AS(solve_fractional_dirichlet(m, p.rhs, bad), Error);
}
