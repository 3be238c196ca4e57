#include <doctest.h>

#include <random>
#include <string>

#include "gofd/checks.hpp"
#include "gofd/error.hpp"

using namespace gofd;

namespace {

void require_all_pass(const std::vector<CheckResult>& results) {
  REQUIRE_FALSE(results.empty());
  for (const auto& r : results) {
    INFO(r.suite << "/" << r.name << ": " << r.detail);
    CHECK(r.passed);
  }
}

}  // namespace

TEST_CASE("random meshes are valid") {
  std::mt19937_64 rng(9);
  for (int d : {1, 2, 3})
    for (int i = 0; i < 5; ++i) {
      auto m = random_mesh(d, rng, 200);
      CHECK(m.dim() == d);
      CHECK(m.num_vertices() <= 200);
      CHECK_NOTHROW(check_topology(m));
    }
}

TEST_CASE("symbol suite") { require_all_pass(check_symbol()); }
TEST_CASE("transfer suite") { require_all_pass(check_transfer(4, 10)); }
TEST_CASE("rank suite") { require_all_pass(check_rank(4, 5)); }
TEST_CASE("mesh motion suite") { require_all_pass(check_mmpde(4)); }

TEST_CASE("suite names") {
  CHECK(check_suite_names().size() == 6);
  CHECK_THROWS_AS(run_checks("bogus", 1), Error);
}
