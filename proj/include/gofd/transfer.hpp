#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gofd/grid.hpp"
#include "gofd/mesh.hpp"

namespace gofd {

struct Location {
  int element = -1;
  Barycentric bary{};
};

// Uniform bucket grid over the mesh bounding box.
class PointLocator {
 public:
  explicit PointLocator(const SimplicialMesh& mesh);

  // Lowest-index element containing x, coordinates clamped and renormalised.
  std::optional<Location> locate(const Point& x) const;
  // Tries `hint` and its neighbourhood first; falls back to the element with the least
  // negative barycentric coordinate when no element contains x.
  Location locate_nearest(const Point& x, int hint = -1) const;

  const SimplicialMesh& mesh() const noexcept { return *mesh_; }
  double cell_size() const noexcept { return cell_; }

 private:
  std::size_t bucket_of(const Point& x) const;
  std::span<const int> candidates(std::size_t bucket) const {
    return {items_.data() + offsets_[bucket], offsets_[bucket + 1] - offsets_[bucket]};
  }

  const SimplicialMesh* mesh_;
  BoundingBox box_;
  double cell_ = 1;
  std::array<int, 3> counts_{1, 1, 1};
  std::vector<std::size_t> offsets_;
  std::vector<int> items_;
};

// Sparse row-major interpolation matrix mesh -> grid.
class TransferMatrix {
 public:
  TransferMatrix() = default;
  TransferMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr, std::vector<int> col,
                 std::vector<double> val);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nonzeros() const noexcept { return val_.size(); }
  const std::vector<std::size_t>& row_ptr() const noexcept { return row_ptr_; }
  const std::vector<int>& col_index() const noexcept { return col_; }
  const std::vector<double>& values() const noexcept { return val_; }
  const std::vector<double>& column_sums() const noexcept { return column_sums_; }

  std::vector<double> apply(std::span<const double> mesh_vector) const;
  void apply(std::span<const double> mesh_vector, std::span<double> grid_vector) const;
  std::vector<double> apply_transpose(std::span<const double> grid_vector) const;
  void apply_transpose(std::span<const double> grid_vector, std::span<double> mesh_vector) const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<int> col_;
  std::vector<double> val_;
  std::vector<double> column_sums_;
};

TransferMatrix build_transfer(const SimplicialMesh& mesh, const OverlayGrid& grid);
// Same matrix obtained by locating every grid node; slower, used as an oracle.
TransferMatrix build_transfer_by_location(const SimplicialMesh& mesh, const OverlayGrid& grid);

inline const std::vector<double>& column_sums(const TransferMatrix& tm) { return tm.column_sums(); }

struct InteriorTransfer {
  TransferMatrix matrix;
  std::vector<int> interior_to_global;
  std::vector<int> global_to_interior;  // -1 for boundary vertices

  std::size_t num_interior() const noexcept { return interior_to_global.size(); }
  std::vector<double> scatter(std::span<const double> interior) const;
  std::vector<double> gather(std::span<const double> full) const;
};

InteriorTransfer restrict_interior(const TransferMatrix& tm, const SimplicialMesh& mesh);

// Largest number of grid nodes inside one closed element.
std::size_t max_nodes_per_element(const SimplicialMesh& mesh, const OverlayGrid& grid);

struct RankReport {
  double min_column_sum = 0;
  double max_column_sum = 0;
  std::vector<std::size_t> zero_columns;
  double lower_bound = 0;  // a_h / ((d+1) sqrt(d) h)
  bool strict_spacing = false;
  bool lower_bound_holds = false;
  std::optional<std::size_t> exact_rank;
  bool full_rank = false;
  std::string warning;
};

inline constexpr std::size_t kRankCheckBudget = 500;

// Throws RankDeficiencyError when a column sum vanishes.
RankReport check_rank_conditions(const TransferMatrix& tm, const MeshStats& stats, const OverlayGrid& grid,
                                 std::size_t rank_check_budget = kRankCheckBudget);

std::size_t exact_rank(const TransferMatrix& tm);

// Piecewise-linear interpolation of vertex values onto points of another mesh (0 outside).
std::vector<double> interpolate_to_mesh(const SimplicialMesh& source, std::span<const double> values,
                                        const SimplicialMesh& target);

}  // namespace gofd
