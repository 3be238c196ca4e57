#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "gofd/mesh.hpp"

namespace gofd {

enum class SpacingRule { paper_default, strict };

using MultiIndex = std::array<int, 3>;

// Uniform lattice c + h_FD*m, m in [-N,N]^d, ordered lexicographically with the last axis fastest.
class OverlayGrid {
 public:
  OverlayGrid() = default;
  OverlayGrid(int dim, Point center, int n, double spacing);

  int dim() const noexcept { return dim_; }
  const Point& center() const noexcept { return center_; }
  int n() const noexcept { return n_; }
  double spacing() const noexcept { return spacing_; }
  double half_width() const noexcept { return spacing_ * n_; }
  int nodes_per_axis() const noexcept { return 2 * n_ + 1; }
  std::size_t num_nodes() const noexcept { return num_nodes_; }

  MultiIndex multi_index(std::size_t linear) const;
  std::size_t linear_index(const MultiIndex& m) const;
  Point node(std::size_t linear) const;
  Point node(const MultiIndex& m) const;

 private:
  int dim_ = 0;
  Point center_{};
  int n_ = 0;
  double spacing_ = 0;
  std::size_t num_nodes_ = 0;
};

struct OverlayOptions {
  SpacingRule rule = SpacingRule::paper_default;
  double safety_factor = 1.1;
  // Keep h_FD equal to the target spacing and grow R = N*h_FD instead of shrinking h_FD = R/N.
  bool exact_spacing = false;
  std::size_t max_grid_nodes = std::size_t{1} << 27;
};

double target_spacing(const MeshStats& stats, int dim, SpacingRule rule);

OverlayGrid build_overlay(const MeshStats& stats, const BoundingBox& box, const OverlayOptions& options = {});

}  // namespace gofd
