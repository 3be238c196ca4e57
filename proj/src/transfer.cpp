#include "gofd/transfer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gofd/error.hpp"

namespace gofd {

namespace {

std::array<Point, 4> element_points(const SimplicialMesh& mesh, std::size_t e) {
  std::array<Point, 4> pts{};
  auto el = mesh.element(e);
  for (std::size_t i = 0; i < el.size(); ++i) pts[i] = mesh.vertex(el[i]);
  return pts;
}

Barycentric bary(const SimplicialMesh& mesh, std::size_t e, const Point& x) {
  auto pts = element_points(mesh, e);
  return simplex_barycentric(mesh.dim(), {pts.data(), static_cast<std::size_t>(mesh.dim() + 1)}, x);
}

double min_coord(const Barycentric& b, int d) {
  double m = b[0];
  for (int i = 1; i <= d; ++i) m = std::min(m, b[i]);
  return m;
}

Barycentric clamp(Barycentric b, int d) {
  double sum = 0;
  for (int i = 0; i <= d; ++i) {
    b[i] = std::clamp(b[i], 0.0, 1.0);
    sum += b[i];
  }
  for (int i = 0; i <= d; ++i) b[i] /= sum;
  return b;
}

void element_box(const SimplicialMesh& mesh, std::size_t e, Point& lo, Point& hi) {
  const int d = mesh.dim();
  auto el = mesh.element(e);
  lo = hi = mesh.vertex(el[0]);
  for (std::size_t i = 1; i < el.size(); ++i)
    for (int r = 0; r < d; ++r) {
      lo[r] = std::min(lo[r], mesh.vertex(el[i])[r]);
      hi[r] = std::max(hi[r], mesh.vertex(el[i])[r]);
    }
}

// Visits every grid node inside the closed element e with its barycentric coordinates.
template <class F>
void for_nodes_in_element(const SimplicialMesh& mesh, const OverlayGrid& grid, std::size_t e, F&& visit) {
  const int d = mesh.dim(), n = grid.n();
  const double h = grid.spacing();
  Point lo, hi;
  element_box(mesh, e, lo, hi);
  std::array<int, 3> a{0, 0, 0}, b{0, 0, 0};
  for (int r = 0; r < d; ++r) {
    double tol = 1e-9;
    a[r] = std::max(-n, static_cast<int>(std::ceil((lo[r] - grid.center()[r]) / h - tol)));
    b[r] = std::min(n, static_cast<int>(std::floor((hi[r] - grid.center()[r]) / h + tol)));
    if (a[r] > b[r]) return;
  }
  auto pts = element_points(mesh, e);
  std::span<const Point> sp{pts.data(), static_cast<std::size_t>(d + 1)};
  MultiIndex m{a[0], a[1], a[2]};
  while (true) {
    Point x = grid.node(m);
    auto lam = simplex_barycentric(d, sp, x);
    if (min_coord(lam, d) >= -kLocationTolerance) visit(grid.linear_index(m), lam);
    int r = d - 1;
    while (r >= 0 && m[r] == b[r]) {
      m[r] = a[r];
      --r;
    }
    if (r < 0) break;
    ++m[r];
  }
}

TransferMatrix assemble(const SimplicialMesh& mesh, std::size_t rows, const std::vector<int>& owner,
                        const std::vector<Barycentric>& lam) {
  const int d = mesh.dim();
  std::vector<std::size_t> ptr(rows + 1, 0);
  std::vector<int> col;
  std::vector<double> val;
  for (std::size_t k = 0; k < rows; ++k) {
    if (owner[k] >= 0) {
      auto el = mesh.element(owner[k]);
      std::array<std::pair<int, double>, 4> entries{};
      int cnt = 0;
      for (int i = 0; i <= d; ++i)
        if (lam[k][i] > 0) entries[cnt++] = {el[i], lam[k][i]};
      std::sort(entries.begin(), entries.begin() + cnt);
      for (int i = 0; i < cnt; ++i) {
        col.push_back(entries[i].first);
        val.push_back(entries[i].second);
      }
    }
    ptr[k + 1] = col.size();
  }
  return TransferMatrix(rows, mesh.num_vertices(), std::move(ptr), std::move(col), std::move(val));
}

}  // namespace

PointLocator::PointLocator(const SimplicialMesh& mesh) : mesh_(&mesh), box_(bounding_box(mesh)) {
  const int d = mesh.dim();
  const std::size_t ne = mesh.num_elements();
  if (ne == 0) fail(ErrorCode::EmptyMesh, "cannot build a locator on an empty mesh");
  double vol = 1, max_diam = 0;
  for (int r = 0; r < d; ++r) vol *= std::max(box_.hi[r] - box_.lo[r], 1e-300);
  for (std::size_t e = 0; e < ne; ++e) {
    Point lo, hi;
    element_box(mesh, e, lo, hi);
    double diam2 = 0;
    for (int r = 0; r < d; ++r) diam2 += (hi[r] - lo[r]) * (hi[r] - lo[r]);
    max_diam = std::max(max_diam, std::sqrt(diam2));
  }
  cell_ = std::min(max_diam, std::pow(vol / static_cast<double>(ne), 1.0 / d));
  if (!(cell_ > 0)) cell_ = 1;
  std::size_t total = 1;
  for (int r = 0; r < d; ++r) {
    counts_[r] = std::max(1, static_cast<int>(std::ceil((box_.hi[r] - box_.lo[r]) / cell_)));
    total *= counts_[r];
  }
  auto range = [&](const Point& lo, const Point& hi, std::array<int, 3>& a, std::array<int, 3>& b) {
    for (int r = 0; r < 3; ++r) a[r] = b[r] = 0;
    for (int r = 0; r < d; ++r) {
      double tol = 1e-9 * cell_;
      a[r] = std::clamp(static_cast<int>(std::floor((lo[r] - tol - box_.lo[r]) / cell_)), 0, counts_[r] - 1);
      b[r] = std::clamp(static_cast<int>(std::floor((hi[r] + tol - box_.lo[r]) / cell_)), 0, counts_[r] - 1);
    }
  };
  offsets_.assign(total + 1, 0);
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<std::size_t> fill;
    if (pass == 1) {
      std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
      items_.resize(offsets_.back());
      fill.assign(offsets_.begin(), offsets_.end() - 1);
    }
    for (std::size_t e = 0; e < ne; ++e) {
      Point lo, hi;
      element_box(mesh, e, lo, hi);
      std::array<int, 3> a, b;
      range(lo, hi, a, b);
      for (int i = a[0]; i <= b[0]; ++i)
        for (int j = a[1]; j <= b[1]; ++j)
          for (int k = a[2]; k <= b[2]; ++k) {
            std::size_t bucket = (static_cast<std::size_t>(i) * counts_[1] + j) * counts_[2] + k;
            if (pass == 0) ++offsets_[bucket + 1];
            else items_[fill[bucket]++] = static_cast<int>(e);
          }
    }
  }
}

std::size_t PointLocator::bucket_of(const Point& x) const {
  std::array<int, 3> c{0, 0, 0};
  for (int r = 0; r < mesh_->dim(); ++r)
    c[r] = std::clamp(static_cast<int>(std::floor((x[r] - box_.lo[r]) / cell_)), 0, counts_[r] - 1);
  return (static_cast<std::size_t>(c[0]) * counts_[1] + c[1]) * counts_[2] + c[2];
}

std::optional<Location> PointLocator::locate(const Point& x) const {
  const int d = mesh_->dim();
  for (int r = 0; r < d; ++r) {
    double tol = 1e-9 * cell_;
    if (x[r] < box_.lo[r] - tol || x[r] > box_.hi[r] + tol) return std::nullopt;
  }
  for (int e : candidates(bucket_of(x))) {
    auto lam = bary(*mesh_, e, x);
    if (min_coord(lam, d) >= -kLocationTolerance) return Location{e, clamp(lam, d)};
  }
  return std::nullopt;
}

Location PointLocator::locate_nearest(const Point& x, int hint) const {
  const int d = mesh_->dim();
  if (hint >= 0 && static_cast<std::size_t>(hint) < mesh_->num_elements()) {
    auto lam = bary(*mesh_, hint, x);
    if (min_coord(lam, d) >= -kLocationTolerance) return {hint, clamp(lam, d)};
  }
  if (auto loc = locate(x)) return *loc;
  Location best;
  double best_min = -std::numeric_limits<double>::infinity();
  auto consider = [&](int e) {
    auto lam = bary(*mesh_, e, x);
    double m = min_coord(lam, d);
    if (m > best_min) {
      best_min = m;
      best = {e, lam};
    }
  };
  auto cand = candidates(bucket_of(x));
  if (cand.empty())
    for (std::size_t e = 0; e < mesh_->num_elements(); ++e) consider(static_cast<int>(e));
  else
    for (int e : cand) consider(e);
  best.bary = clamp(best.bary, d);
  return best;
}

TransferMatrix::TransferMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                               std::vector<int> col, std::vector<double> val)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_(std::move(col)), val_(std::move(val)),
      column_sums_(cols, 0.0) {
  if (row_ptr_.size() != rows_ + 1 || col_.size() != val_.size() || row_ptr_.back() != val_.size())
    fail(ErrorCode::ParameterMismatch, "inconsistent sparse transfer storage");
  for (std::size_t k = 0; k < val_.size(); ++k) column_sums_[col_[k]] += val_[k];
}

void TransferMatrix::apply(std::span<const double> u, std::span<double> out) const {
  if (u.size() != cols_ || out.size() != rows_) fail(ErrorCode::ParameterMismatch, "transfer apply length mismatch");
  for (std::size_t r = 0; r < rows_; ++r) {
    double s = 0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += val_[k] * u[col_[k]];
    out[r] = s;
  }
}

std::vector<double> TransferMatrix::apply(std::span<const double> u) const {
  std::vector<double> out(rows_);
  apply(u, out);
  return out;
}

void TransferMatrix::apply_transpose(std::span<const double> g, std::span<double> out) const {
  if (g.size() != rows_ || out.size() != cols_)
    fail(ErrorCode::ParameterMismatch, "transfer transpose length mismatch");
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) out[col_[k]] += val_[k] * g[r];
}

std::vector<double> TransferMatrix::apply_transpose(std::span<const double> g) const {
  std::vector<double> out(cols_);
  apply_transpose(g, out);
  return out;
}

TransferMatrix build_transfer(const SimplicialMesh& mesh, const OverlayGrid& grid) {
  if (mesh.dim() != grid.dim()) fail(ErrorCode::ParameterMismatch, "mesh and grid dimensions differ");
  const std::size_t rows = grid.num_nodes();
  std::vector<int> owner(rows, -1);
  std::vector<Barycentric> lam(rows);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e)
    for_nodes_in_element(mesh, grid, e, [&](std::size_t k, const Barycentric& b) {
      if (owner[k] < 0) {
        owner[k] = static_cast<int>(e);
        lam[k] = clamp(b, mesh.dim());
      }
    });
  return assemble(mesh, rows, owner, lam);
}

TransferMatrix build_transfer_by_location(const SimplicialMesh& mesh, const OverlayGrid& grid) {
  if (mesh.dim() != grid.dim()) fail(ErrorCode::ParameterMismatch, "mesh and grid dimensions differ");
  PointLocator loc(mesh);
  const std::size_t rows = grid.num_nodes();
  std::vector<int> owner(rows, -1);
  std::vector<Barycentric> lam(rows);
  for (std::size_t k = 0; k < rows; ++k)
    if (auto l = loc.locate(grid.node(k))) {
      owner[k] = l->element;
      lam[k] = l->bary;
    }
  return assemble(mesh, rows, owner, lam);
}

std::vector<double> InteriorTransfer::scatter(std::span<const double> interior) const {
  if (interior.size() != interior_to_global.size())
    fail(ErrorCode::ParameterMismatch, "interior vector length mismatch");
  std::vector<double> full(global_to_interior.size(), 0.0);
  for (std::size_t i = 0; i < interior.size(); ++i) full[interior_to_global[i]] = interior[i];
  return full;
}

std::vector<double> InteriorTransfer::gather(std::span<const double> full) const {
  if (full.size() != global_to_interior.size()) fail(ErrorCode::ParameterMismatch, "mesh vector length mismatch");
  std::vector<double> out(interior_to_global.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = full[interior_to_global[i]];
  return out;
}

InteriorTransfer restrict_interior(const TransferMatrix& tm, const SimplicialMesh& mesh) {
  if (tm.cols() != mesh.num_vertices()) fail(ErrorCode::ParameterMismatch, "transfer/mesh size mismatch");
  InteriorTransfer it;
  it.global_to_interior.assign(mesh.num_vertices(), -1);
  for (std::size_t j = 0; j < mesh.num_vertices(); ++j)
    if (!mesh.is_boundary(j)) {
      it.global_to_interior[j] = static_cast<int>(it.interior_to_global.size());
      it.interior_to_global.push_back(static_cast<int>(j));
    }
  std::vector<std::size_t> ptr(tm.rows() + 1, 0);
  std::vector<int> col;
  std::vector<double> val;
  for (std::size_t r = 0; r < tm.rows(); ++r) {
    for (std::size_t k = tm.row_ptr()[r]; k < tm.row_ptr()[r + 1]; ++k) {
      int c = it.global_to_interior[tm.col_index()[k]];
      if (c >= 0) {
        col.push_back(c);
        val.push_back(tm.values()[k]);
      }
    }
    ptr[r + 1] = col.size();
  }
  it.matrix = TransferMatrix(tm.rows(), it.interior_to_global.size(), std::move(ptr), std::move(col), std::move(val));
  return it;
}

std::size_t max_nodes_per_element(const SimplicialMesh& mesh, const OverlayGrid& grid) {
  std::size_t best = 0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    std::size_t count = 0;
    for_nodes_in_element(mesh, grid, e, [&](std::size_t, const Barycentric&) { ++count; });
    best = std::max(best, count);
  }
  return best;
}

std::size_t exact_rank(const TransferMatrix& tm) {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < tm.rows(); ++r)
    if (tm.row_ptr()[r + 1] > tm.row_ptr()[r]) rows.push_back(r);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(tm.cols()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = tm.row_ptr()[rows[i]]; k < tm.row_ptr()[rows[i] + 1]; ++k)
      a(static_cast<Eigen::Index>(i), tm.col_index()[k]) = tm.values()[k];
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  return static_cast<std::size_t>(qr.rank());
}

RankReport check_rank_conditions(const TransferMatrix& tm, const MeshStats& stats, const OverlayGrid& grid,
                                 std::size_t budget) {
  RankReport rep;
  const auto& cs = tm.column_sums();
  const int d = grid.dim();
  rep.min_column_sum = cs.empty() ? 0 : *std::min_element(cs.begin(), cs.end());
  rep.max_column_sum = cs.empty() ? 0 : *std::max_element(cs.begin(), cs.end());
  for (std::size_t j = 0; j < cs.size(); ++j)
    if (!(cs[j] > 0)) rep.zero_columns.push_back(j);
  if (!rep.zero_columns.empty())
    throw RankDeficiencyError(rep.zero_columns, std::to_string(rep.zero_columns.size()) +
                                                    " mesh vertices have no grid node in their support");
  const double strict_h = stats.a_h / ((d + 1) * std::sqrt(static_cast<double>(d)));
  rep.strict_spacing = grid.spacing() <= strict_h * (1 + 1e-12);
  rep.lower_bound = stats.a_h / ((d + 1) * std::sqrt(static_cast<double>(d)) * stats.h);
  rep.lower_bound_holds = rep.min_column_sum >= rep.lower_bound * (1 - 1e-12);
  if (tm.cols() <= budget) {
    rep.exact_rank = exact_rank(tm);
    rep.full_rank = *rep.exact_rank == tm.cols();
  } else {
    rep.full_rank = rep.strict_spacing;
    if (!rep.strict_spacing)
      rep.warning = "grid spacing exceeds the strict rule; full column rank is not guaranteed";
  }
  return rep;
}

std::vector<double> interpolate_to_mesh(const SimplicialMesh& source, std::span<const double> values,
                                        const SimplicialMesh& target) {
  if (values.size() != source.num_vertices()) fail(ErrorCode::ParameterMismatch, "source values length mismatch");
  PointLocator loc(source);
  std::vector<double> out(target.num_vertices(), 0.0);
  for (std::size_t j = 0; j < target.num_vertices(); ++j)
    if (auto l = loc.locate(target.vertex(j))) {
      auto el = source.element(l->element);
      double v = 0;
      for (std::size_t i = 0; i < el.size(); ++i) v += l->bary[i] * values[el[i]];
      out[j] = v;
    }
  return out;
}

}  // namespace gofd
