#include <algorithm>
#include <cmath>
#include <numbers>

#include "gofd/error.hpp"
#include "gofd/mesh.hpp"

namespace gofd {

namespace {

void orient(int d, const std::vector<Point>& v, Element& el) {
  std::array<Point, 4> pts{};
  for (int i = 0; i <= d; ++i) pts[i] = v[el[i]];
  if (signed_volume(d, {pts.data(), static_cast<std::size_t>(d + 1)}) < 0) std::swap(el[0], el[1]);
}

SimplicialMesh interval_mesh(int n) {
  std::vector<Point> v(n + 1);
  std::vector<std::uint8_t> b(n + 1, 0);
  for (int i = 0; i <= n; ++i) v[i] = {-1.0 + 2.0 * i / n, 0, 0};
  v[n][0] = 1.0;
  b.front() = b.back() = 1;
  std::vector<Element> e(n);
  for (int i = 0; i < n; ++i) e[i] = {i, i + 1, -1, -1};
  return SimplicialMesh(1, std::move(v), std::move(e), std::move(b));
}

// Concentric rings of radius i/n with 6i vertices; neighbouring rings are
// stitched by merging their angle-sorted vertex lists.
SimplicialMesh disk_mesh(int n) {
  std::vector<Point> v{{0, 0, 0}};
  std::vector<std::uint8_t> b{0};
  std::vector<int> ring_start{0};
  for (int i = 1; i <= n; ++i) {
    ring_start.push_back(static_cast<int>(v.size()));
    const int m = 6 * i;
    const double r = static_cast<double>(i) / n;
    for (int k = 0; k < m; ++k) {
      double t = 2.0 * std::numbers::pi * k / m;
      v.push_back({r * std::cos(t), r * std::sin(t), 0});
      b.push_back(i == n ? 1 : 0);
    }
  }
  std::vector<Element> e;
  e.reserve(6 * static_cast<std::size_t>(n) * n);
  for (int k = 0; k < 6; ++k) e.push_back({0, 1 + k, 1 + (k + 1) % 6, -1});
  for (int i = 2; i <= n; ++i) {
    const int ni = 6 * (i - 1), no = 6 * i;
    const int si = ring_start[i - 1], so = ring_start[i];
    int p = 0, q = 0;
    while (p < ni || q < no) {
      bool advance_inner;
      if (p == ni) advance_inner = false;
      else if (q == no) advance_inner = true;
      else advance_inner = static_cast<double>(p + 1) / ni < static_cast<double>(q + 1) / no;
      if (advance_inner) {
        e.push_back({si + p, so + q % no, si + (p + 1) % ni, -1});
        ++p;
      } else {
        e.push_back({si + p % ni, so + q, so + (q + 1) % no, -1});
        ++q;
      }
    }
  }
  for (auto& el : e) orient(2, v, el);
  return SimplicialMesh(2, std::move(v), std::move(e), std::move(b));
}

SimplicialMesh lshape_mesh(int n) {
  const int m = 2 * n;
  std::vector<int> id((m + 1) * (m + 1), -1);
  std::vector<Point> v;
  std::vector<std::uint8_t> b;
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= m; ++j) {
      if (i > n && j < n) continue;
      id[i * (m + 1) + j] = static_cast<int>(v.size());
      v.push_back({-1.0 + static_cast<double>(i) / n, -1.0 + static_cast<double>(j) / n, 0});
      bool bd = i == 0 || i == m || j == 0 || j == m || (i >= n && j == n) || (i == n && j <= n);
      b.push_back(bd ? 1 : 0);
    }
  std::vector<Element> e;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (i >= n && j < n) continue;
      int v00 = id[i * (m + 1) + j], v10 = id[(i + 1) * (m + 1) + j];
      int v01 = id[i * (m + 1) + j + 1], v11 = id[(i + 1) * (m + 1) + j + 1];
      e.push_back({v00, v10, v11, -1});
      e.push_back({v00, v11, v01, -1});
    }
  return SimplicialMesh(2, std::move(v), std::move(e), std::move(b));
}

// Octant-reflected Kuhn subdivision of a cube lattice on [-1,1]^3 pushed radially onto the ball.
SimplicialMesh ball_mesh(int n) {
  const int m = 2 * n;
  auto idx = [m](int i, int j, int k) { return (i * (m + 1) + j) * (m + 1) + k; };
  std::vector<Point> v;
  std::vector<std::uint8_t> b;
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= m; ++j)
      for (int k = 0; k <= m; ++k) {
        Point x{-1.0 + static_cast<double>(i) / n, -1.0 + static_cast<double>(j) / n,
                -1.0 + static_cast<double>(k) / n};
        double linf = std::max({std::abs(x[0]), std::abs(x[1]), std::abs(x[2])});
        double l2 = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        if (l2 > 0)
          for (double& c : x) c *= linf / l2;
        bool bd = i == 0 || j == 0 || k == 0 || i == m || j == m || k == m;
        if (bd) {
          double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
          for (double& c : x) c /= r;
        }
        v.push_back(x);
        b.push_back(bd ? 1 : 0);
      }
  static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  std::vector<Element> e;
  e.reserve(6 * static_cast<std::size_t>(m) * m * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (const auto& p : perms) {
          // walk from the cell corner nearest the centre outward so every tetrahedron spans two shells
          const std::array<int, 3> lo{i, j, k};
          std::array<int, 3> c{}, step{};
          for (int s = 0; s < 3; ++s) {
            c[s] = lo[s] < n ? lo[s] + 1 : lo[s];
            step[s] = lo[s] < n ? -1 : 1;
          }
          Element el{idx(c[0], c[1], c[2]), 0, 0, 0};
          for (int s = 0; s < 3; ++s) {
            c[p[s]] += step[p[s]];
            el[s + 1] = idx(c[0], c[1], c[2]);
          }
          orient(3, v, el);
          e.push_back(el);
        }
  return SimplicialMesh(3, std::move(v), std::move(e), std::move(b));
}

}  // namespace

MeshKind parse_mesh_kind(const std::string& name) {
  if (name == "interval") return MeshKind::interval;
  if (name == "disk") return MeshKind::disk;
  if (name == "lshape") return MeshKind::lshape;
  if (name == "ball") return MeshKind::ball;
  fail(ErrorCode::UnknownMeshKind, "unknown mesh kind '" + name + "'");
}

const char* to_string(MeshKind kind) {
  switch (kind) {
    case MeshKind::interval: return "interval";
    case MeshKind::disk: return "disk";
    case MeshKind::lshape: return "lshape";
    case MeshKind::ball: return "ball";
  }
  return "?";
}

int mesh_kind_dim(MeshKind kind) {
  switch (kind) {
    case MeshKind::interval: return 1;
    case MeshKind::ball: return 3;
    default: return 2;
  }
}

SimplicialMesh generate_benchmark_mesh(MeshKind kind, int resolution) {
  if (resolution < 1) fail(ErrorCode::InvalidParameter, "resolution must be at least 1");
  switch (kind) {
    case MeshKind::interval: return interval_mesh(resolution);
    case MeshKind::disk: return disk_mesh(resolution);
    case MeshKind::lshape: return lshape_mesh(resolution);
    case MeshKind::ball: return ball_mesh(resolution);
  }
  fail(ErrorCode::UnknownMeshKind, "unknown mesh kind");
}

}  // namespace gofd
