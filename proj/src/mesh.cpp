#include "gofd/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "gofd/error.hpp"

namespace gofd {

namespace {

using Mat = std::array<std::array<double, 3>, 3>;

double det(int d, const Mat& a) {
  switch (d) {
    case 1: return a[0][0];
    case 2: return a[0][0] * a[1][1] - a[0][1] * a[1][0];
    default:
      return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
             a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
             a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  }
}

// Columns are edge vectors x_i - x_0.
Mat edge_matrix(int d, std::span<const Point> pts) {
  Mat e{};
  for (int i = 0; i < d; ++i)
    for (int r = 0; r < d; ++r) e[r][i] = pts[i + 1][r] - pts[0][r];
  return e;
}

double factorial(int d) { return d == 1 ? 1.0 : d == 2 ? 2.0 : 6.0; }

double distance(int d, const Point& a, const Point& b) {
  double s = 0;
  for (int r = 0; r < d; ++r) s += (a[r] - b[r]) * (a[r] - b[r]);
  return std::sqrt(s);
}

// Measure of the facet opposite local vertex j.
double facet_measure(int d, std::span<const Point> pts, int j) {
  std::array<Point, 3> f{};
  int n = 0;
  for (int i = 0; i <= d; ++i)
    if (i != j) f[n++] = pts[i];
  if (d == 1) return 1.0;
  if (d == 2) return distance(2, f[0], f[1]);
  Point u{f[1][0] - f[0][0], f[1][1] - f[0][1], f[1][2] - f[0][2]};
  Point v{f[2][0] - f[0][0], f[2][1] - f[0][1], f[2][2] - f[0][2]};
  Point c{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
  return 0.5 * std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
}

double simplex_diameter(int d, std::span<const Point> pts) {
  double diam = 0;
  for (int i = 0; i <= d; ++i)
    for (int j = i + 1; j <= d; ++j) diam = std::max(diam, distance(d, pts[i], pts[j]));
  return diam;
}

std::array<Point, 4> gather(const SimplicialMesh& mesh, std::size_t e) {
  std::array<Point, 4> pts{};
  auto el = mesh.element(e);
  for (std::size_t i = 0; i < el.size(); ++i) pts[i] = mesh.vertex(el[i]);
  return pts;
}

void check_element(int d, std::span<const Point> pts, std::size_t e) {
  double vol = signed_volume(d, pts);
  double diam = simplex_diameter(d, pts);
  if (!(vol > 1e-14 * std::pow(diam, d)))
    fail(ErrorCode::DegenerateElement,
         "element " + std::to_string(e) + (vol < 0 ? " is inverted" : " is degenerate") +
             " (signed volume " + std::to_string(vol) + ")");
}

}  // namespace

SimplicialMesh::SimplicialMesh(int dim, std::vector<Point> vertices, std::vector<Element> elements,
                               std::vector<std::uint8_t> boundary)
    : dim_(dim),
      vertices_(std::move(vertices)),
      elements_(std::move(elements)),
      boundary_(std::move(boundary)) {
  if (dim_ < 1 || dim_ > 3) fail(ErrorCode::InvalidParameter, "mesh dimension must be 1, 2 or 3");
  if (boundary_.empty()) boundary_.assign(vertices_.size(), 0);
  if (boundary_.size() != vertices_.size())
    fail(ErrorCode::ParameterMismatch, "boundary flag count differs from vertex count");
  const int nv = static_cast<int>(vertices_.size());
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    auto& el = elements_[e];
    for (int i = 0; i < 4; ++i) {
      if (i > dim_) {
        el[i] = -1;
        continue;
      }
      if (el[i] < 0 || el[i] >= nv)
        fail(ErrorCode::IndexOutOfRange, "element " + std::to_string(e) + " references vertex " +
                                             std::to_string(el[i]));
    }
    auto pts = gather(*this, e);
    check_element(dim_, {pts.data(), static_cast<std::size_t>(dim_ + 1)}, e);
  }
}

SimplicialMesh SimplicialMesh::with_vertices(std::vector<Point> vertices) const {
  if (vertices.size() != vertices_.size())
    fail(ErrorCode::ParameterMismatch, "vertex count changed");
  return SimplicialMesh(dim_, std::move(vertices), elements_, boundary_);
}

double ElementGeometry::inradius() const {
  double s = 0;
  for (double a : heights)
    if (a > 0) s += 1.0 / a;
  return 1.0 / s;
}

double signed_volume(int dim, std::span<const Point> pts) {
  return det(dim, edge_matrix(dim, pts)) / factorial(dim);
}

double signed_volume(const SimplicialMesh& mesh, std::size_t e) {
  auto pts = gather(mesh, e);
  return signed_volume(mesh.dim(), {pts.data(), static_cast<std::size_t>(mesh.dim() + 1)});
}

ElementGeometry simplex_geometry(int d, std::span<const Point> pts) {
  ElementGeometry g;
  g.volume = std::abs(signed_volume(d, pts));
  g.diameter = simplex_diameter(d, pts);
  if (!(g.volume > 1e-14 * std::pow(g.diameter, d)))
    fail(ErrorCode::DegenerateElement, "degenerate simplex");
  g.min_height = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= d; ++j) {
    g.heights[j] = d * g.volume / facet_measure(d, pts, j);
    g.min_height = std::min(g.min_height, g.heights[j]);
  }
  return g;
}

ElementGeometry element_geometry(const SimplicialMesh& mesh, std::size_t e) {
  if (e >= mesh.num_elements())
    fail(ErrorCode::IndexOutOfRange, "element id " + std::to_string(e));
  auto pts = gather(mesh, e);
  return simplex_geometry(mesh.dim(), {pts.data(), static_cast<std::size_t>(mesh.dim() + 1)});
}

Barycentric simplex_barycentric(int d, std::span<const Point> pts, const Point& x) {
  Mat e = edge_matrix(d, pts);
  double dt = det(d, e);
  double scale = simplex_diameter(d, pts);
  if (!(std::abs(dt) > 1e-14 * std::pow(scale, d) * factorial(d)))
    fail(ErrorCode::DegenerateElement, "degenerate simplex");
  Barycentric lam{0, 0, 0, 0};
  double rhs[3];
  for (int r = 0; r < d; ++r) rhs[r] = x[r] - pts[0][r];
  double sum = 0;
  for (int i = 0; i < d; ++i) {
    Mat m = e;
    for (int r = 0; r < d; ++r) m[r][i] = rhs[r];
    lam[i + 1] = det(d, m) / dt;
    sum += lam[i + 1];
  }
  lam[0] = 1.0 - sum;
  return lam;
}

Barycentric barycentric_coordinates(const SimplicialMesh& mesh, std::size_t e, const Point& x) {
  if (e >= mesh.num_elements())
    fail(ErrorCode::IndexOutOfRange, "element id " + std::to_string(e));
  auto pts = gather(mesh, e);
  return simplex_barycentric(mesh.dim(), {pts.data(), static_cast<std::size_t>(mesh.dim() + 1)}, x);
}

MeshStats mesh_stats(const SimplicialMesh& mesh) {
  if (mesh.num_elements() == 0 || mesh.num_vertices() == 0)
    fail(ErrorCode::EmptyMesh, "mesh has no elements");
  MeshStats st;
  st.a_h = std::numeric_limits<double>::infinity();
  std::vector<int> valence(mesh.num_vertices(), 0);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    auto g = element_geometry(mesh, e);
    st.h = std::max(st.h, g.diameter);
    st.a_h = std::min(st.a_h, g.min_height);
    for (int v : mesh.element(e)) ++valence[v];
  }
  st.n_val = *std::max_element(valence.begin(), valence.end());
  st.h_bar = std::pow(static_cast<double>(mesh.num_elements()), -1.0 / mesh.dim());
  return st;
}

VertexPatches::VertexPatches(const SimplicialMesh& mesh) : offsets_(mesh.num_vertices() + 1, 0) {
  for (std::size_t e = 0; e < mesh.num_elements(); ++e)
    for (int v : mesh.element(e)) ++offsets_[v + 1];
  std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
  elements_.resize(offsets_.back());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e)
    for (int v : mesh.element(e)) elements_[fill[v]++] = static_cast<int>(e);
}

VertexPatches vertex_patches(const SimplicialMesh& mesh) { return VertexPatches(mesh); }

namespace {

std::map<std::array<int, 3>, std::vector<Facet>> facet_map(const SimplicialMesh& mesh) {
  std::map<std::array<int, 3>, std::vector<Facet>> facets;
  const int d = mesh.dim();
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    auto el = mesh.element(e);
    for (int j = 0; j <= d; ++j) {
      Facet f;
      int n = 0;
      for (int i = 0; i <= d; ++i)
        if (i != j) f.vertices[n++] = el[i];
      std::sort(f.vertices.begin(), f.vertices.begin() + n);
      f.element = static_cast<int>(e);
      f.local = j;
      facets[f.vertices].push_back(f);
    }
  }
  return facets;
}

}  // namespace

std::vector<Facet> boundary_facets(const SimplicialMesh& mesh) {
  std::vector<Facet> out;
  for (auto& [key, list] : facet_map(mesh))
    if (list.size() == 1) out.push_back(list.front());
  return out;
}

void check_topology(const SimplicialMesh& mesh) {
  for (auto& [key, list] : facet_map(mesh)) {
    if (list.size() > 2)
      fail(ErrorCode::DegenerateMesh, "facet shared by " + std::to_string(list.size()) + " elements");
    if (list.size() == 1)
      for (int v : key)
        if (v >= 0 && !mesh.is_boundary(v))
          fail(ErrorCode::DegenerateMesh,
               "vertex " + std::to_string(v) + " lies on a boundary facet but is not flagged");
  }
}

std::vector<std::uint8_t> boundary_flags_from_facets(const SimplicialMesh& mesh) {
  std::vector<std::uint8_t> flags(mesh.num_vertices(), 0);
  for (const auto& f : boundary_facets(mesh))
    for (int v : f.vertices)
      if (v >= 0) flags[v] = 1;
  return flags;
}

BoundingBox bounding_box(const SimplicialMesh& mesh) {
  if (mesh.num_vertices() == 0) fail(ErrorCode::EmptyMesh, "mesh has no vertices");
  BoundingBox b;
  b.dim = mesh.dim();
  b.lo = mesh.vertex(0);
  b.hi = mesh.vertex(0);
  for (const auto& x : mesh.vertices())
    for (int r = 0; r < b.dim; ++r) {
      b.lo[r] = std::min(b.lo[r], x[r]);
      b.hi[r] = std::max(b.hi[r], x[r]);
    }
  return b;
}

}  // namespace gofd
