#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <set>

#include "gofd/adaptivity.hpp"
#include "gofd/error.hpp"

namespace gofd {

namespace {

std::vector<int> element_vertex_ring(const SimplicialMesh& mesh, const VertexPatches& patches,
                                     const std::vector<int>& seeds) {
  std::set<int> out(seeds.begin(), seeds.end());
  for (int v : seeds)
    for (int e : patches.patch(v))
      for (int w : mesh.element(e)) out.insert(w);
  return {out.begin(), out.end()};
}

// Quadratic least-squares fit around c scaled by len; returns the Hessian or nothing when rank deficient.
std::optional<SmallMatrix> fit_hessian(const SimplicialMesh& mesh, std::span<const double> u,
                                       const std::vector<int>& verts, const Point& c, double len) {
  const int d = mesh.dim();
  const int p = 1 + d + d * (d + 1) / 2;
  if (static_cast<int>(verts.size()) < p) return std::nullopt;
  Eigen::MatrixXd a(verts.size(), p);
  Eigen::VectorXd b(verts.size());
  for (std::size_t r = 0; r < verts.size(); ++r) {
    const Point& x = mesh.vertex(verts[r]);
    double y[3];
    for (int i = 0; i < d; ++i) y[i] = (x[i] - c[i]) / len;
    int col = 0;
    a(r, col++) = 1.0;
    for (int i = 0; i < d; ++i) a(r, col++) = y[i];
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) a(r, col++) = y[i] * y[j];
    b(r) = u[verts[r]];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) return std::nullopt;
  Eigen::VectorXd coef = qr.solve(b);
  SmallMatrix h(d, d);
  int col = 1 + d;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      double v = coef(col++) / (len * len);
      if (i == j) h(i, i) = 2 * v;
      else h(i, j) = h(j, i) = v;
    }
  return h;
}

double det_small(const SmallMatrix& m) { return m.determinant(); }

}  // namespace

RecoveredHessian recover_hessian(const SimplicialMesh& mesh, std::span<const double> u) {
  if (u.size() != mesh.num_vertices()) fail(ErrorCode::ParameterMismatch, "vertex field length mismatch");
  const int d = mesh.dim();
  VertexPatches patches(mesh);
  RecoveredHessian out;
  out.dim = d;
  out.tensors.resize(mesh.num_elements());
  out.fallback.assign(mesh.num_elements(), 0);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    auto el = mesh.element(e);
    std::vector<int> seeds(el.begin(), el.end());
    Point c{0, 0, 0};
    for (int v : el)
      for (int r = 0; r < d; ++r) c[r] += mesh.vertex(v)[r] / (d + 1);
    const double len = element_geometry(mesh, e).diameter;
    auto verts = element_vertex_ring(mesh, patches, seeds);
    std::optional<SmallMatrix> h;
    for (int ring = 0; ring <= 3 && !h; ++ring) {
      if (ring > 0) verts = element_vertex_ring(mesh, patches, verts);
      h = fit_hessian(mesh, u, verts, c, len);
    }
    if (h) {
      out.tensors[e] = *h;
    } else {
      out.tensors[e] = SmallMatrix::Zero(d, d);
      out.fallback[e] = 1;
    }
  }
  return out;
}

SmallMatrix absolute_value(const SmallMatrix& h) {
  const int d = static_cast<int>(h.rows());
  if (d == 1) return h.cwiseAbs();
  if (d == 2) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es;
    es.computeDirect(Eigen::Matrix2d(h));
    Eigen::Matrix2d r = es.eigenvectors() * es.eigenvalues().cwiseAbs().asDiagonal() * es.eigenvectors().transpose();
    return r;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
  es.computeDirect(Eigen::Matrix3d(h));
  Eigen::Matrix3d r = es.eigenvectors() * es.eigenvalues().cwiseAbs().asDiagonal() * es.eigenvectors().transpose();
  return r;
}

MetricField identity_metric(const SimplicialMesh& mesh) {
  MetricField m;
  m.dim = mesh.dim();
  m.tensors.assign(mesh.num_elements(), SmallMatrix::Identity(m.dim, m.dim));
  m.identity = true;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) m.sigma += element_geometry(mesh, e).volume;
  return m;
}

double alpha_equation_lhs(const SimplicialMesh& mesh, const RecoveredHessian& hessian, double alpha) {
  const int d = mesh.dim();
  double sum = 0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    SmallMatrix a = SmallMatrix::Identity(d, d) + absolute_value(hessian.tensors[e]) / alpha;
    sum += element_geometry(mesh, e).volume * std::pow(det_small(a), 2.0 / (d + 4));
  }
  return sum;
}

MetricField metric_from_hessian(const SimplicialMesh& mesh, const RecoveredHessian& hessian) {
  if (hessian.tensors.size() != mesh.num_elements()) fail(ErrorCode::ParameterMismatch, "Hessian count mismatch");
  const int d = mesh.dim();
  std::vector<SmallMatrix> absh(mesh.num_elements());
  std::vector<double> vol(mesh.num_elements());
  double omega = 0, hmax = 0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    absh[e] = absolute_value(hessian.tensors[e]);
    vol[e] = element_geometry(mesh, e).volume;
    omega += vol[e];
    hmax = std::max(hmax, absh[e].cwiseAbs().maxCoeff());
  }
  if (!(hmax > 0)) return identity_metric(mesh);
  auto lhs = [&](double alpha) {
    double sum = 0;
    for (std::size_t e = 0; e < absh.size(); ++e) {
      SmallMatrix a = SmallMatrix::Identity(d, d) + absh[e] / alpha;
      sum += vol[e] * std::pow(det_small(a), 2.0 / (d + 4));
    }
    return sum - 2 * omega;
  };
  double lo = hmax, hi = hmax;
  while (lhs(hi) > 0) hi *= 2;
  while (lhs(lo) < 0) lo /= 2;
  for (int it = 0; it < 400 && hi - lo > 1e-15 * hi; ++it) {
    double mid = std::sqrt(lo * hi);
    if (mid <= lo || mid >= hi) mid = 0.5 * (lo + hi);
    (lhs(mid) > 0 ? lo : hi) = mid;
  }
  MetricField m;
  m.dim = d;
  m.alpha = 0.5 * (lo + hi);
  m.tensors.resize(mesh.num_elements());
  for (std::size_t e = 0; e < absh.size(); ++e) {
    SmallMatrix a = SmallMatrix::Identity(d, d) + absh[e] / m.alpha;
    m.tensors[e] = std::pow(det_small(a), -1.0 / (d + 4)) * a;
    m.sigma += std::sqrt(det_small(m.tensors[e])) * vol[e];
  }
  return m;
}

std::vector<SmallMatrix> vertex_metrics(const SimplicialMesh& mesh, const MetricField& metric) {
  const int d = mesh.dim();
  std::vector<SmallMatrix> out(mesh.num_vertices(), SmallMatrix::Zero(d, d));
  std::vector<double> w(mesh.num_vertices(), 0.0);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const double v = element_geometry(mesh, e).volume;
    for (int j : mesh.element(e)) {
      out[j] += v * metric.tensors[e];
      w[j] += v;
    }
  }
  for (std::size_t j = 0; j < out.size(); ++j) out[j] /= w[j];
  return out;
}

MetricInterpolant::MetricInterpolant(const SimplicialMesh& background, const MetricField& metric)
    : mesh_(std::make_shared<const SimplicialMesh>(background)) {
  if (metric.tensors.size() != background.num_elements())
    fail(ErrorCode::ParameterMismatch, "metric does not match the background mesh");
  locator_ = std::make_unique<PointLocator>(*mesh_);
  vertex_ = gofd::vertex_metrics(*mesh_, metric);
  const int d = mesh_->dim();
  bary_grad_.resize(mesh_->num_elements());
  for (std::size_t e = 0; e < mesh_->num_elements(); ++e) {
    auto el = mesh_->element(e);
    Eigen::Matrix3d ed = Eigen::Matrix3d::Identity();
    for (int i = 0; i < d; ++i)
      for (int r = 0; r < d; ++r) ed(r, i) = mesh_->vertex(el[i + 1])[r] - mesh_->vertex(el[0])[r];
    Eigen::MatrixXd inv = ed.topLeftCorner(d, d).inverse();
    auto& g = bary_grad_[e];
    g[0] = {0, 0, 0};
    for (int i = 0; i < d; ++i)
      for (int r = 0; r < d; ++r) {
        g[i + 1][r] = inv(i, r);
        g[0][r] -= inv(i, r);
      }
  }
}

MetricInterpolant::Sample MetricInterpolant::evaluate(const Point& x, int hint) const {
  const int d = mesh_->dim();
  auto loc = locator_->locate_nearest(x, hint);
  Sample s;
  s.element = loc.element;
  s.m = SmallMatrix::Zero(d, d);
  for (int r = 0; r < 3; ++r) s.grad[r] = SmallMatrix::Zero(d, d);
  auto el = mesh_->element(loc.element);
  const auto& g = bary_grad_[loc.element];
  for (int i = 0; i <= d; ++i) {
    s.m += loc.bary[i] * vertex_[el[i]];
    for (int r = 0; r < d; ++r) s.grad[r] += g[i][r] * vertex_[el[i]];
  }
  return s;
}

}  // namespace gofd
