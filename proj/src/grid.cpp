#include "gofd/grid.hpp"

#include <cmath>
#include <sstream>

#include "gofd/error.hpp"

namespace gofd {

OverlayGrid::OverlayGrid(int dim, Point center, int n, double spacing)
    : dim_(dim), center_(center), n_(n), spacing_(spacing) {
  if (dim < 1 || dim > 3 || n < 1 || !(spacing > 0))
    fail(ErrorCode::InvalidParameter, "invalid overlay grid parameters");
  num_nodes_ = 1;
  for (int r = 0; r < dim; ++r) num_nodes_ *= static_cast<std::size_t>(2 * n + 1);
}

MultiIndex OverlayGrid::multi_index(std::size_t linear) const {
  if (linear >= num_nodes_)
    fail(ErrorCode::IndexOutOfRange, "grid index " + std::to_string(linear));
  MultiIndex m{0, 0, 0};
  const std::size_t w = nodes_per_axis();
  for (int r = dim_ - 1; r >= 0; --r) {
    m[r] = static_cast<int>(linear % w) - n_;
    linear /= w;
  }
  return m;
}

std::size_t OverlayGrid::linear_index(const MultiIndex& m) const {
  std::size_t k = 0;
  const std::size_t w = nodes_per_axis();
  for (int r = 0; r < dim_; ++r) {
    if (m[r] < -n_ || m[r] > n_) fail(ErrorCode::IndexOutOfRange, "grid multi-index out of range");
    k = k * w + static_cast<std::size_t>(m[r] + n_);
  }
  return k;
}

Point OverlayGrid::node(const MultiIndex& m) const {
  Point x{0, 0, 0};
  for (int r = 0; r < dim_; ++r) x[r] = center_[r] + spacing_ * m[r];
  return x;
}

Point OverlayGrid::node(std::size_t linear) const { return node(multi_index(linear)); }

double target_spacing(const MeshStats& stats, int dim, SpacingRule rule) {
  if (rule == SpacingRule::paper_default) return stats.a_h;
  return stats.a_h / ((dim + 1) * std::sqrt(static_cast<double>(dim)));
}

OverlayGrid build_overlay(const MeshStats& stats, const BoundingBox& box, const OverlayOptions& options) {
  if (!(stats.a_h > 0)) fail(ErrorCode::DegenerateMesh, "minimum element height is not positive");
  const int d = box.dim;
  Point c{0, 0, 0};
  double diag2 = 0;
  for (int r = 0; r < d; ++r) {
    if (box.hi[r] < box.lo[r]) fail(ErrorCode::EmptyMesh, "empty bounding box");
    c[r] = 0.5 * (box.lo[r] + box.hi[r]);
    diag2 += (box.hi[r] - box.lo[r]) * (box.hi[r] - box.lo[r]);
  }
  const double radius = options.safety_factor * 0.5 * std::sqrt(diag2);
  const double h = target_spacing(stats, d, options.rule);
  double nd = std::ceil(radius / h);
  if (nd < 1) nd = 1;
  const double axis = 2 * nd + 1;
  const double total = std::pow(axis, d);
  if (total > static_cast<double>(options.max_grid_nodes) || nd > 1e9) {
    std::ostringstream msg;
    msg << "overlay grid needs " << total << " nodes (" << total * 8 * 6 / 1e9
        << " GB of working vectors), budget " << options.max_grid_nodes;
    fail(ErrorCode::GridTooFine, msg.str());
  }
  const int n = static_cast<int>(nd);
  const double spacing = options.exact_spacing ? h : radius / n;
  return OverlayGrid(d, c, n, spacing);
}

}  // namespace gofd
