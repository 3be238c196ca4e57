#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "gofd/mesh.hpp"
#include "gofd/problems.hpp"
#include "gofd/solver.hpp"
#include "gofd/transfer.hpp"

namespace gofd {

using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

struct RecoveredHessian {
  int dim = 0;
  std::vector<SmallMatrix> tensors;
  std::vector<std::uint8_t> fallback;  // 1 where the fit stayed rank deficient and H was zeroed
};

RecoveredHessian recover_hessian(const SimplicialMesh& mesh, std::span<const double> u);

struct MetricField {
  int dim = 0;
  std::vector<SmallMatrix> tensors;
  double alpha = 0;
  double sigma = 0;
  bool identity = false;
};

MetricField identity_metric(const SimplicialMesh& mesh);
MetricField metric_from_hessian(const SimplicialMesh& mesh, const RecoveredHessian& hessian);
// Left side of the regularisation equation, sum |K| det(I + |H_K|/alpha)^(2/(d+4)).
double alpha_equation_lhs(const SimplicialMesh& mesh, const RecoveredHessian& hessian, double alpha);
SmallMatrix absolute_value(const SmallMatrix& h);

// Piecewise-linear metric over a background mesh; vertex values are volume-weighted
// averages of the adjacent element metrics.
class MetricInterpolant {
 public:
  MetricInterpolant(const SimplicialMesh& background, const MetricField& metric);

  struct Sample {
    SmallMatrix m;
    std::array<SmallMatrix, 3> grad;  // derivative with respect to each coordinate
    int element = -1;
  };

  Sample evaluate(const Point& x, int hint = -1) const;
  const std::vector<SmallMatrix>& vertex_metrics() const noexcept { return vertex_; }
  int dim() const noexcept { return mesh_->dim(); }

 private:
  std::shared_ptr<const SimplicialMesh> mesh_;
  std::unique_ptr<PointLocator> locator_;
  std::vector<SmallMatrix> vertex_;
  std::vector<std::array<Point, 4>> bary_grad_;
};

std::vector<SmallMatrix> vertex_metrics(const SimplicialMesh& mesh, const MetricField& metric);

// Element energy and its vertex gradient. dm holds the metric derivative with respect to
// the element centroid (may be null for a fixed metric).
double element_energy(int dim, std::span<const Point> pts, const SmallMatrix& m,
                      const std::array<SmallMatrix, 3>* dm = nullptr, std::array<Point, 4>* grad = nullptr);

struct EnergyTerms {
  double alignment = 0;       // sum (1/3) sqrt(det M)|K| tr(...)^(3d/4)
  double equidistribution = 0;  // sum (d^(3d/4)/3) sqrt(det M)|K| (sqrt(det M) det F')^(-3d/4)
};

EnergyTerms mesh_energy_terms(const SimplicialMesh& mesh, const MetricField& metric);
double mesh_energy(const SimplicialMesh& mesh, const MetricField& metric);
double mesh_energy(const SimplicialMesh& mesh, const MetricInterpolant& metric);
std::vector<Point> energy_gradient(const SimplicialMesh& mesh, const MetricField& metric);
std::vector<Point> energy_gradient(const SimplicialMesh& mesh, const MetricInterpolant& metric);

enum class BoundaryMotion { fixed, slide_straight };

struct VertexConstraint {
  int dofs = 0;                  // number of free directions
  std::array<Point, 3> basis{};  // orthonormal tangent directions
};

std::vector<VertexConstraint> vertex_constraints(const SimplicialMesh& mesh, BoundaryMotion motion);

// -(sqrt(det M(x_i))/tau) dI/dx_i projected onto each vertex's free directions.
std::vector<Point> vertex_velocities(const SimplicialMesh& mesh, const MetricField& metric, double tau,
                                     BoundaryMotion motion = BoundaryMotion::fixed);

struct MmpdeConfig {
  double tau = 1e-2;
  double t_end = 1.0;
  double dt_initial = 1e-6;
  double dt_min = 1e-12;
  std::size_t max_steps = 2000;
  BoundaryMotion boundary = BoundaryMotion::fixed;
  double quality_floor = 1e-3;
};

struct MmpdeResult {
  SimplicialMesh mesh;
  bool stalled = false;
  bool quality_flag = false;
  double min_quality = 0;  // min a_K / h_K
  double time_reached = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::vector<double> energy_history;  // energy after each accepted step, starting at t = 0
};

MmpdeResult integrate_mmpde(const SimplicialMesh& mesh, const MetricField& metric, const MmpdeConfig& config = {});

// max/min ratio of sqrt(det M(c_K)) |K| over elements.
double equidistribution_ratio(const SimplicialMesh& mesh, const MetricInterpolant& metric);

struct AdaptConfig {
  int l_max = 5;
  MmpdeConfig mmpde;
  SolverConfig solver;
};

struct AdaptRound {
  int index = 0;
  std::size_t ne = 0;
  MeshStats stats;
  GridSummary grid;
  SolveReport solve;
  std::optional<ErrorNorms> errors;
  double alpha = 0;
  std::size_t steps_accepted = 0;
  std::size_t steps_rejected = 0;
  double energy_initial = 0;
  double energy_final = 0;
  bool stalled = false;
  bool quality_flag = false;
};

struct AdaptResult {
  SimplicialMesh mesh;
  std::vector<double> solution;
  SolveReport final_solve;
  std::optional<ErrorNorms> final_errors;
  GridSummary final_grid;
  std::vector<AdaptRound> rounds;
  std::vector<SimplicialMesh> meshes;  // mesh used by each round, then the final mesh
  bool stalled = false;
  bool solver_failed = false;
};

// l_max rounds of solve + mesh motion, then a solve on the last mesh.
AdaptResult adapt_loop(const BenchmarkProblem& problem, const SimplicialMesh& initial, const AdaptConfig& config);

}  // namespace gofd
