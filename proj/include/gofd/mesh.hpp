#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gofd {

using Point = std::array<double, 3>;
using Element = std::array<int, 4>;  // unused slots hold -1
using Barycentric = std::array<double, 4>;

inline constexpr double kLocationTolerance = 1e-12;

// Unstructured simplicial mesh in 1, 2 or 3 dimensions. Immutable after construction.
class SimplicialMesh {
 public:
  SimplicialMesh() = default;
  // Validates index ranges and strict positive orientation of every element.
  SimplicialMesh(int dim, std::vector<Point> vertices, std::vector<Element> elements,
                 std::vector<std::uint8_t> boundary);

  int dim() const noexcept { return dim_; }
  std::size_t num_vertices() const noexcept { return vertices_.size(); }
  std::size_t num_elements() const noexcept { return elements_.size(); }

  const Point& vertex(std::size_t i) const { return vertices_[i]; }
  std::span<const int> element(std::size_t e) const {
    return {elements_[e].data(), static_cast<std::size_t>(dim_ + 1)};
  }
  bool is_boundary(std::size_t i) const { return boundary_[i] != 0; }

  const std::vector<Point>& vertices() const noexcept { return vertices_; }
  const std::vector<Element>& elements() const noexcept { return elements_; }
  const std::vector<std::uint8_t>& boundary_flags() const noexcept { return boundary_; }

  // Same connectivity and flags, new coordinates (validated).
  SimplicialMesh with_vertices(std::vector<Point> vertices) const;

 private:
  int dim_ = 0;
  std::vector<Point> vertices_;
  std::vector<Element> elements_;
  std::vector<std::uint8_t> boundary_;
};

struct ElementGeometry {
  double volume = 0;
  std::array<double, 4> heights{};  // a_j, distance from vertex j to the opposite facet
  double min_height = 0;
  double diameter = 0;

  double inradius() const;
};

struct MeshStats {
  double h = 0;      // max diameter
  double a_h = 0;    // min height
  int n_val = 0;     // max valence
  double h_bar = 0;  // N_e^(-1/d)
};

// Signed volume of the simplex spanned by d+1 points (d! normalised).
double signed_volume(int dim, std::span<const Point> pts);
double signed_volume(const SimplicialMesh& mesh, std::size_t e);

ElementGeometry element_geometry(const SimplicialMesh& mesh, std::size_t e);
ElementGeometry simplex_geometry(int dim, std::span<const Point> pts);

Barycentric barycentric_coordinates(const SimplicialMesh& mesh, std::size_t e, const Point& x);
Barycentric simplex_barycentric(int dim, std::span<const Point> pts, const Point& x);

MeshStats mesh_stats(const SimplicialMesh& mesh);

// Element ids containing each vertex, compressed row storage.
class VertexPatches {
 public:
  explicit VertexPatches(const SimplicialMesh& mesh);

  std::span<const int> patch(std::size_t j) const {
    return {elements_.data() + offsets_[j], offsets_[j + 1] - offsets_[j]};
  }
  std::size_t size() const noexcept { return offsets_.size() - 1; }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<int> elements_;
};

VertexPatches vertex_patches(const SimplicialMesh& mesh);

struct Facet {
  std::array<int, 3> vertices{-1, -1, -1};  // sorted, unused slots -1
  int element = -1;
  int local = -1;  // local index of the opposite vertex
};

// Facets shared by exactly one element.
std::vector<Facet> boundary_facets(const SimplicialMesh& mesh);

// Throws DegenerateMesh when a facet is shared by more than two elements or a
// boundary facet has an unflagged vertex.
void check_topology(const SimplicialMesh& mesh);

// Boundary flags derived from the facets.
std::vector<std::uint8_t> boundary_flags_from_facets(const SimplicialMesh& mesh);

enum class MeshKind { interval, disk, lshape, ball };

MeshKind parse_mesh_kind(const std::string& name);
const char* to_string(MeshKind kind);
int mesh_kind_dim(MeshKind kind);

SimplicialMesh generate_benchmark_mesh(MeshKind kind, int resolution);

struct BoundingBox {
  int dim = 0;
  Point lo{};
  Point hi{};
};

BoundingBox bounding_box(const SimplicialMesh& mesh);

}  // namespace gofd
