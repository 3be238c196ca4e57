#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "gofd/mesh.hpp"
#include "gofd/solver.hpp"

namespace gofd {

double log_gamma(double x);
double gamma_function(double x);
double jacobi_polynomial(int k, double a, double b, double x);

struct BenchmarkProblem {
  int dim = 1;
  double s = 0.5;
  int k = 0;
  double rhs_coefficient = 0;
  ScalarField rhs;
  std::optional<ScalarField> exact;
};

// Unit-ball problem with f = c P_k^{(s, d/2-1)}(2|x|^2-1) and u = (1-|x|^2)_+^s P_k^{(s, d/2-1)}(2|x|^2-1).
BenchmarkProblem make_benchmark(int dim, double s, int k);

struct ErrorNorms {
  double linf = 0;
  double l2 = 0;
};

ErrorNorms error_norms(const SimplicialMesh& mesh, std::span<const double> u_h, const ScalarField& exact);

struct ConvergenceRow {
  std::size_t ne = 0;
  double h_bar = 0;
  double l2 = 0;
  double linf = 0;
  std::size_t iterations = 0;
  double seconds = 0;
  bool converged = true;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double slope_l2 = 0;
  double slope_linf = 0;

  void sort_and_fit();
  bool all_converged() const;
};

// Least-squares slope of log(y) against log(x).
double fit_slope(std::span<const double> x, std::span<const double> y);

ConvergenceTable convergence_study(const BenchmarkProblem& problem, const std::vector<SimplicialMesh>& meshes,
                                   const SolverConfig& config);

}  // namespace gofd
