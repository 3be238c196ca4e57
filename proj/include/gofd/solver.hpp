#pragma once

#include <Eigen/SparseCore>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gofd/grid.hpp"
#include "gofd/mesh.hpp"
#include "gofd/symbol.hpp"
#include "gofd/toeplitz.hpp"
#include "gofd/transfer.hpp"

namespace gofd {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using ScalarField = std::function<double(const Point&)>;

// v -> I^T A_FD I v on interior unknowns.
class GofdOperator {
 public:
  GofdOperator(ToeplitzOperator toeplitz, TransferMatrix transfer, InteriorTransfer interior, double s);

  const ToeplitzOperator& toeplitz() const noexcept { return toeplitz_; }
  const OverlayGrid& grid() const noexcept { return toeplitz_.grid(); }
  const TransferMatrix& transfer() const noexcept { return transfer_; }
  const InteriorTransfer& interior() const noexcept { return interior_; }
  double h_fd() const noexcept { return toeplitz_.grid().spacing(); }
  double s() const noexcept { return s_; }
  std::size_t size() const noexcept { return interior_.num_interior(); }

  std::vector<double> apply(std::span<const double> v) const;
  void apply(std::span<const double> v, std::span<double> out) const;

 private:
  ToeplitzOperator toeplitz_;
  TransferMatrix transfer_;
  InteriorTransfer interior_;
  double s_;
};

inline std::vector<double> apply_system(const GofdOperator& op, std::span<const double> v) { return op.apply(v); }

enum class RhsMode { grid_rhs, mesh_rhs };

std::vector<double> assemble_rhs(const GofdOperator& op, const SimplicialMesh& mesh, const ScalarField& f,
                                 RhsMode mode);

enum class StencilPattern { none, stencil3, stencil5, stencil9, stencil7, stencil27 };

const char* to_string(StencilPattern p);
StencilPattern parse_stencil_pattern(const std::string& name);
StencilPattern default_pattern(int dim);
int pattern_dim(StencilPattern p);

// A_FD restricted to the stencil offsets, on the full grid.
SparseMatrix extract_sparse_pattern(const SymbolCoefficients& symbol, const OverlayGrid& grid, StencilPattern pattern);

// Lower-triangular factor (strict lower entries plus diagonal) with level-of-fill pattern.
struct IncompleteCholesky {
  std::vector<std::size_t> row_ptr{0};
  std::vector<int> col;  // ascending, diagonal last
  std::vector<double> val;
  double shift = 0;
  int attempts = 0;

  std::size_t size() const noexcept { return row_ptr.size() - 1; }
  void solve_in_place(std::span<double> v) const;
};

// Symbolic level-of-fill pattern of a symmetric matrix (lower triangle, diagonal included).
std::vector<std::vector<int>> level_fill_pattern(const SparseMatrix& a, int level);
IncompleteCholesky incomplete_cholesky(const SparseMatrix& a, int level = 1, double initial_shift = 1e-3,
                                       int max_shifts = 8);

struct SparsePreconditioner {
  StencilPattern pattern = StencilPattern::none;
  SparseMatrix reduced;  // I^T A^(p) I
  IncompleteCholesky factor;

  double shift() const noexcept { return factor.shift; }
  std::vector<double> apply(std::span<const double> r) const;
};

SparseMatrix to_sparse(const TransferMatrix& tm);
SparsePreconditioner build_preconditioner(const SparseMatrix& a_pattern, const TransferMatrix& transfer_interior,
                                          StencilPattern pattern);

struct SolveReport {
  std::size_t iterations = 0;
  std::vector<double> residual_history;
  bool converged = false;
  double seconds = 0;
  std::optional<double> l2_error;
  std::optional<double> linf_error;
};

struct CgOptions {
  double tol = 1e-10;
  std::size_t max_iter = 5000;
};

struct CgResult {
  std::vector<double> interior;  // unknowns
  std::vector<double> solution;  // full mesh vector, zero on the boundary
  SolveReport report;
};

CgResult solve_cg(const GofdOperator& op, std::span<const double> rhs, const CgOptions& options = {},
                  const SparsePreconditioner* precond = nullptr);

// f - h^(-2s) A_FD I u_e on the grid.
std::vector<double> local_truncation_error(const GofdOperator& op, std::span<const double> exact_u,
                                           std::span<const double> f_grid);

// Samples f at grid nodes covered by the mesh, zero elsewhere.
std::vector<double> sample_on_grid(const GofdOperator& op, const ScalarField& f);

struct SolverConfig {
  double s = 0.5;
  OverlayOptions overlay{SpacingRule::paper_default, 1.1, true};
  RhsMode rhs = RhsMode::grid_rhs;
  std::optional<StencilPattern> precond;  // empty picks the dimension default
  CgOptions cg;
  SymbolCache* cache = nullptr;
  std::int64_t symbol_m = 0;
};

struct GridSummary {
  int n = 0;
  double h_fd = 0;
  double half_width = 0;
  std::size_t nodes = 0;
};

struct FixedSolve {
  CgResult result;
  GridSummary grid;
  double precond_shift = 0;
  double setup_seconds = 0;
};

GofdOperator build_gofd_operator(const SimplicialMesh& mesh, const SolverConfig& config);

// Overlay, symbol, operator, right-hand side, preconditioner and CG in one call.
FixedSolve solve_fractional_dirichlet(const SimplicialMesh& mesh, const ScalarField& f, const SolverConfig& config);

}  // namespace gofd
