#include <doctest.h>

#include <cmath>
#include <vector>

#include "gofd/adaptivity.hpp"
#include "gofd/error.hpp"
#include "gofd/problems.hpp"

using namespace gofd;
using doctest::Approx;

namespace {

std::vector<double> sample(const SimplicialMesh& m, double (*f)(const Point&)) {
  std::vector<double> u(m.num_vertices());
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = f(m.vertex(j));
  return u;
}

double bump(const Point& x) { return std::pow(std::max(0.0, 1 - x[0] * x[0]), 0.25); }

RecoveredHessian scaled(RecoveredHessian h, double c) {
  for (auto& t : h.tensors) t *= c;
  return h;
}

}  // namespace

TEST_CASE("Hessian recovery is exact for quadratics") {
  auto m1 = generate_benchmark_mesh(MeshKind::interval, 12);
  auto h1 = recover_hessian(m1, sample(m1, [](const Point& x) { return x[0] * x[0]; }));
  for (const auto& t : h1.tensors) CHECK(t(0, 0) == Approx(2.0).epsilon(1e-10));

  auto m2 = generate_benchmark_mesh(MeshKind::disk, 5);
  auto hl = recover_hessian(m2, sample(m2, [](const Point& x) { return 1 + 3 * x[0] - x[1]; }));
  for (const auto& t : hl.tensors) CHECK(t.cwiseAbs().maxCoeff() < 1e-9);
  auto hxy = recover_hessian(m2, sample(m2, [](const Point& x) { return x[0] * x[1]; }));
  for (const auto& t : hxy.tensors) {
    CHECK(t(0, 0) == Approx(0.0).scale(1.0).epsilon(1e-9));
    CHECK(t(0, 1) == Approx(1.0).epsilon(1e-9));
    CHECK(t(1, 0) == Approx(1.0).epsilon(1e-9));
    CHECK(t(1, 1) == Approx(0.0).scale(1.0).epsilon(1e-9));
  }
  CHECK_THROWS_AS(recover_hessian(m2, std::vector<double>(3)), Error);
}

TEST_CASE("metric construction") {
  auto m = generate_benchmark_mesh(MeshKind::disk, 5);
  auto zero = recover_hessian(m, std::vector<double>(m.num_vertices(), 0.0));
  auto id = metric_from_hessian(m, zero);
  CHECK(id.identity);
  for (const auto& t : id.tensors) CHECK((t - SmallMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);

  auto h = recover_hessian(m, sample(m, [](const Point& x) { return std::exp(2 * x[0]) + x[1] * x[1] * x[0]; }));
  auto metric = metric_from_hessian(m, h);
  CHECK_FALSE(metric.identity);
  double omega = 0;
  for (std::size_t e = 0; e < m.num_elements(); ++e) omega += element_geometry(m, e).volume;
  CHECK(std::abs(alpha_equation_lhs(m, h, metric.alpha) - 2 * omega) <= 1e-10 * omega);
  for (const auto& t : metric.tensors) {
    Eigen::SelfAdjointEigenSolver<SmallMatrix> es(t);
    CHECK(es.eigenvalues().minCoeff() > 0);
  }

  auto again = metric_from_hessian(m, scaled(h, 7.5));
  CHECK(again.alpha == Approx(7.5 * metric.alpha).epsilon(1e-10));
  for (std::size_t e = 0; e < m.num_elements(); ++e)
    CHECK((again.tensors[e] - metric.tensors[e]).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("absolute value of a symmetric matrix") {
  SmallMatrix a(2, 2);
  a << 1, 2, 2, -2;
  auto b = absolute_value(a);
  CHECK((b - b.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  Eigen::SelfAdjointEigenSolver<SmallMatrix> es(b);
  CHECK(es.eigenvalues()(0) == Approx(2.0).epsilon(1e-12));
  CHECK(es.eigenvalues()(1) == Approx(3.0).epsilon(1e-12));
}

TEST_CASE("energy terms scale with a constant metric factor") {
  for (auto kind : {MeshKind::interval, MeshKind::disk, MeshKind::ball}) {
    auto mesh = generate_benchmark_mesh(kind, kind == MeshKind::interval ? 9 : 3);
    const int d = mesh.dim();
    const double q = 3.0 * d / 4;
    auto base = identity_metric(mesh);
    auto t1 = mesh_energy_terms(mesh, base);
    const double gamma = 2.7;
    auto big = base;
    for (auto& t : big.tensors) t *= gamma;
    auto t2 = mesh_energy_terms(mesh, big);
    CHECK(t2.alignment == Approx(t1.alignment * std::pow(gamma, d / 2.0 - q)).epsilon(1e-12));
    CHECK(t2.equidistribution == Approx(t1.equidistribution * std::pow(gamma, d / 2.0 * (1 - q))).epsilon(1e-12));
    CHECK(mesh_energy(mesh, base) == Approx(t1.alignment + t1.equidistribution).epsilon(1e-13));
  }
}

TEST_CASE("uniform 1D mesh is a fixed point") {
  auto m = generate_benchmark_mesh(MeshKind::interval, 16);
  auto id = identity_metric(m);
  for (const auto& v : vertex_velocities(m, id, 0.01)) CHECK(std::abs(v[0]) < 1e-12);
  auto r = integrate_mmpde(m, id);
  CHECK_FALSE(r.stalled);
  for (std::size_t j = 0; j < m.num_vertices(); ++j) CHECK(r.mesh.vertex(j)[0] == Approx(m.vertex(j)[0]).epsilon(1e-10));
  CHECK_THROWS_AS(vertex_velocities(m, id, 0.0), Error);
}

TEST_CASE("boundary constraints") {
  auto lshape = generate_benchmark_mesh(MeshKind::lshape, 4);
  auto fixed = vertex_constraints(lshape, BoundaryMotion::fixed);
  auto slide = vertex_constraints(lshape, BoundaryMotion::slide_straight);
  for (std::size_t j = 0; j < lshape.num_vertices(); ++j) {
    if (!lshape.is_boundary(j)) {
      CHECK(fixed[j].dofs == 2);
      continue;
    }
    CHECK(fixed[j].dofs == 0);
    const auto& x = lshape.vertex(j);
    const double corners[6][2] = {{-1, -1}, {0, -1}, {0, 0}, {1, 0}, {1, 1}, {-1, 1}};
    bool corner = false;
    for (const auto& c : corners) corner = corner || (std::abs(x[0] - c[0]) < 1e-12 && std::abs(x[1] - c[1]) < 1e-12);
    if (corner) CHECK(slide[j].dofs == 0);
    else CHECK(slide[j].dofs == 1);
  }
}

TEST_CASE("mesh motion decreases the energy and improves equidistribution") {
  auto m = generate_benchmark_mesh(MeshKind::interval, 64);
  auto h = recover_hessian(m, sample(m, bump));
  auto metric = metric_from_hessian(m, h);
  MetricInterpolant interp(m, metric);
  auto r = integrate_mmpde(m, metric);
  CHECK_FALSE(r.stalled);
  REQUIRE(r.energy_history.size() >= 2);
  for (std::size_t k = 1; k < r.energy_history.size(); ++k) CHECK(r.energy_history[k] <= r.energy_history[k - 1]);
  CHECK(r.energy_history.back() < r.energy_history.front());
  CHECK(equidistribution_ratio(r.mesh, interp) <= 1.01 * equidistribution_ratio(m, interp));
  CHECK(r.mesh.elements() == m.elements());
  CHECK(r.mesh.boundary_flags() == m.boundary_flags());
  CHECK(r.mesh.vertex(0)[0] == -1.0);
  CHECK(r.mesh.vertex(64)[0] == 1.0);
  // vertices move toward the boundary layers
  CHECK(r.mesh.vertex(1)[0] - r.mesh.vertex(0)[0] < m.vertex(1)[0] - m.vertex(0)[0]);
}

TEST_CASE("mesh motion in 2D keeps a valid mesh") {
  auto m = generate_benchmark_mesh(MeshKind::disk, 6);
  auto h = recover_hessian(m, sample(m, [](const Point& x) { return std::pow(std::max(0.0, 1 - x[0] * x[0] - x[1] * x[1]), 0.3); }));
  auto metric = metric_from_hessian(m, h);
  MmpdeConfig cfg;
  cfg.max_steps = 200;
  auto r = integrate_mmpde(m, metric, cfg);
  CHECK(r.mesh.num_elements() == m.num_elements());
  for (std::size_t e = 0; e < m.num_elements(); ++e) CHECK(signed_volume(r.mesh, e) > 0);
  for (std::size_t j = 0; j < m.num_vertices(); ++j)
    if (m.is_boundary(j)) CHECK(r.mesh.vertex(j) == m.vertex(j));
  CHECK(r.energy_history.back() <= r.energy_history.front());
}

TEST_CASE("adaptive loop beats the uniform mesh in 1D") {
  auto p = make_benchmark(1, 0.25, 0);
  auto m = generate_benchmark_mesh(MeshKind::interval, 256);
  SolverConfig sc;
  sc.s = 0.25;
  auto uniform = solve_fractional_dirichlet(m, p.rhs, sc);
  auto ue = error_norms(m, uniform.result.solution, *p.exact);
  AdaptConfig ac;
  ac.solver = sc;
  auto r = adapt_loop(p, m, ac);
  CHECK_FALSE(r.stalled);
  CHECK_FALSE(r.solver_failed);
  CHECK(r.rounds.size() == 5);
  CHECK(r.meshes.size() == 6);
  REQUIRE(r.final_errors);
  CHECK(r.final_errors->l2 < ue.l2);
  for (const auto& round : r.rounds) CHECK(round.energy_final <= round.energy_initial);
  auto bad = ac;
  bad.l_max = -1;
  CHECK_THROWS_AS(adapt_loop(p, m, bad), Error);
}
