#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gofd/mesh.hpp"

namespace gofd {

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0;
};

// Benchmark mesh with jittered interior vertices, random scale and shift; at most max_vertices vertices.
SimplicialMesh random_mesh(int dim, std::mt19937_64& rng, std::size_t max_vertices = 300);

std::vector<CheckResult> check_toeplitz(std::uint64_t seed);
std::vector<CheckResult> check_symbol();
std::vector<CheckResult> check_definiteness();
std::vector<CheckResult> check_transfer(std::uint64_t seed, int cases = 50);
std::vector<CheckResult> check_rank(std::uint64_t seed, int cases = 20);
std::vector<CheckResult> check_mmpde(std::uint64_t seed);

const std::vector<std::string>& check_suite_names();
// suite is one of check_suite_names() or "all".
std::vector<CheckResult> run_checks(const std::string& suite, std::uint64_t seed);

}  // namespace gofd
