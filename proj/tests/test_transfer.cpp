#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gofd/checks.hpp"
#include "gofd/error.hpp"
#include "gofd/grid.hpp"
#include "gofd/transfer.hpp"

using namespace gofd;
using doctest::Approx;

namespace {

SimplicialMesh three_point_interval() {
  return SimplicialMesh(1, {{0, 0, 0}, {0.5, 0, 0}, {1, 0, 0}}, {{0, 1, -1, -1}, {1, 2, -1, -1}}, {1, 0, 1});
}

double row_weight(const TransferMatrix& tm, std::size_t r, int c) {
  for (std::size_t k = tm.row_ptr()[r]; k < tm.row_ptr()[r + 1]; ++k)
    if (tm.col_index()[k] == c) return tm.values()[k];
  return 0;
}

}  // namespace

TEST_CASE("point location on an interval") {
  auto m = three_point_interval();
  PointLocator loc(m);
  auto a = loc.locate({0.25, 0, 0});
  REQUIRE(a);
  CHECK(a->element == 0);
  CHECK(a->bary[0] == Approx(0.5));
  CHECK(a->bary[1] == Approx(0.5));
  auto mid = loc.locate({0.5, 0, 0});
  REQUIRE(mid);
  CHECK(mid->element == 0);
  CHECK(mid->bary[1] == Approx(1.0));
  CHECK_FALSE(loc.locate({1.2, 0, 0}));
  CHECK_FALSE(loc.locate({-0.1, 0, 0}));
  auto near = loc.locate_nearest({1.2, 0, 0});
  CHECK(near.element == 1);
}

TEST_CASE("transfer rows on an interval") {
  auto m = three_point_interval();
  OverlayGrid g(1, {0.5, 0, 0}, 2, 0.35);  // nodes -0.2, 0.15, 0.5, 0.85, 1.2
  auto tm = build_transfer(m, g);
  CHECK(tm.rows() == 5);
  CHECK(tm.cols() == 3);
  CHECK(tm.row_ptr()[1] == tm.row_ptr()[0]);
  CHECK(row_weight(tm, 1, 0) == Approx(0.7));
  CHECK(row_weight(tm, 1, 1) == Approx(0.3));
  CHECK(row_weight(tm, 2, 1) == Approx(1.0));
  CHECK(row_weight(tm, 2, 0) == Approx(0.0));
  CHECK(row_weight(tm, 3, 1) == Approx(0.3));
  CHECK(row_weight(tm, 3, 2) == Approx(0.7));
  CHECK(tm.row_ptr()[5] == tm.row_ptr()[4]);
  CHECK(tm.column_sums()[0] == Approx(0.7));
  CHECK(tm.column_sums()[1] == Approx(1.6));
  CHECK(tm.column_sums()[2] == Approx(0.7));
}

TEST_CASE("transfer is consistent on random meshes") {
  std::mt19937_64 rng(21);
  for (int d : {1, 2, 3}) {
    for (int trial = 0; trial < 3; ++trial) {
      auto m = random_mesh(d, rng, 120);
      auto stats = mesh_stats(m);
      auto g = build_overlay(stats, bounding_box(m));
      auto tm = build_transfer(m, g);
      auto oracle = build_transfer_by_location(m, g);
      CHECK(tm.row_ptr() == oracle.row_ptr());
      CHECK(tm.col_index() == oracle.col_index());
      for (std::size_t k = 0; k < tm.nonzeros(); ++k) CHECK(tm.values()[k] == Approx(oracle.values()[k]).epsilon(1e-12));

      std::normal_distribution<double> nd;
      std::vector<double> u(tm.cols()), w(tm.rows());
      for (auto& x : u) x = nd(rng);
      for (auto& x : w) x = nd(rng);
      auto iu = tm.apply(u);
      auto itw = tm.apply_transpose(w);
      double lhs = 0, rhs = 0;
      for (std::size_t i = 0; i < w.size(); ++i) lhs += w[i] * iu[i];
      for (std::size_t i = 0; i < u.size(); ++i) rhs += u[i] * itw[i];
      CHECK(lhs == Approx(rhs).epsilon(1e-12));

      // affine functions are reproduced exactly at covered nodes
      std::vector<double> lin(m.num_vertices());
      for (std::size_t j = 0; j < lin.size(); ++j) lin[j] = 0.3 + m.vertex(j)[0] - 2 * m.vertex(j)[d - 1];
      auto il = tm.apply(lin);
      for (std::size_t r = 0; r < tm.rows(); ++r) {
        if (tm.row_ptr()[r + 1] == tm.row_ptr()[r]) continue;
        auto x = g.node(r);
        CHECK(il[r] == Approx(0.3 + x[0] - 2 * x[d - 1]).epsilon(1e-11));
        double sum = 0;
        for (std::size_t k = tm.row_ptr()[r]; k < tm.row_ptr()[r + 1]; ++k) sum += tm.values()[k];
        CHECK(sum == Approx(1.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("too coarse a grid leaves vertices unseen") {
  auto m = generate_benchmark_mesh(MeshKind::interval, 16);
  auto stats = mesh_stats(m);
  OverlayGrid g(1, {0, 0, 0}, 1, 10 * stats.h);
  auto tm = build_transfer(m, g);
  try {
    check_rank_conditions(tm, stats, g);
    FAIL("expected RankDeficiencyError");
  } catch (const RankDeficiencyError& e) {
    CHECK(e.code() == ErrorCode::RankDeficiencyRisk);
    CHECK(!e.vertices().empty());
  }
}

TEST_CASE("strict spacing gives full rank") {
  auto m = generate_benchmark_mesh(MeshKind::disk, 4);
  auto stats = mesh_stats(m);
  OverlayOptions opt{SpacingRule::strict, 1.1, false};
  auto g = build_overlay(stats, bounding_box(m), opt);
  auto tm = build_transfer(m, g);
  auto rep = check_rank_conditions(tm, stats, g);
  CHECK(rep.strict_spacing);
  CHECK(rep.lower_bound_holds);
  REQUIRE(rep.exact_rank);
  CHECK(*rep.exact_rank == m.num_vertices());
  CHECK(rep.full_rank);
}

TEST_CASE("interior restriction") {
  auto m = three_point_interval();
  OverlayGrid g(1, {0.5, 0, 0}, 2, 0.35);
  auto tm = build_transfer(m, g);
  auto it = restrict_interior(tm, m);
  CHECK(it.num_interior() == 1);
  CHECK(it.interior_to_global[0] == 1);
  CHECK(it.global_to_interior[0] == -1);
  CHECK(it.matrix.cols() == 1);
  CHECK(it.matrix.column_sums()[0] == Approx(1.6));
  std::vector<double> one{2.5};
  auto full = it.scatter(one);
  CHECK(full == std::vector<double>{0, 2.5, 0});
  CHECK(it.gather(full) == one);
}

TEST_CASE("interpolation between meshes") {
  auto coarse = generate_benchmark_mesh(MeshKind::disk, 3);
  auto fine = generate_benchmark_mesh(MeshKind::disk, 7);
  std::vector<double> lin(coarse.num_vertices());
  for (std::size_t j = 0; j < lin.size(); ++j) lin[j] = 1 + coarse.vertex(j)[0] + 0.5 * coarse.vertex(j)[1];
  auto out = interpolate_to_mesh(coarse, lin, fine);
  for (std::size_t j = 0; j < fine.num_vertices(); ++j) {
    const auto& x = fine.vertex(j);
    PointLocator loc(coarse);
    if (loc.locate(x)) CHECK(out[j] == Approx(1 + x[0] + 0.5 * x[1]).epsilon(1e-12));
  }
}
