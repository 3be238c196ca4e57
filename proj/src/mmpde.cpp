#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "gofd/adaptivity.hpp"
#include "gofd/error.hpp"

namespace gofd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Edge matrix of the unit-volume equilateral reference simplex.
SmallMatrix reference_edges(int d) {
  SmallMatrix e = SmallMatrix::Zero(d, d);
  if (d == 1) {
    e(0, 0) = 1;
  } else if (d == 2) {
    const double a = std::sqrt(4.0 / std::sqrt(3.0));
    e << a, 0.5 * a, 0, 0.5 * std::sqrt(3.0) * a;
  } else {
    const double a = std::cbrt(6.0 * std::sqrt(2.0));
    e << a, 0.5 * a, 0.5 * a, 0, 0.5 * std::sqrt(3.0) * a, std::sqrt(3.0) / 6 * a, 0, 0, std::sqrt(2.0 / 3.0) * a;
  }
  return e;
}

const SmallMatrix& reference_gram(int d) {
  static const SmallMatrix w[3] = {reference_edges(1).transpose() * reference_edges(1),
                                   reference_edges(2).transpose() * reference_edges(2),
                                   reference_edges(3).transpose() * reference_edges(3)};
  return w[d - 1];
}

double factorial(int d) { return d == 1 ? 1.0 : d == 2 ? 2.0 : 6.0; }

Point centroid(int d, std::span<const Point> pts) {
  Point c{0, 0, 0};
  for (int i = 0; i <= d; ++i)
    for (int r = 0; r < d; ++r) c[r] += pts[i][r] / (d + 1);
  return c;
}

// Evaluates the mesh energy for positions x; metric(e, centroid, hint) yields the element metric.
struct EnergyModel {
  const SimplicialMesh* mesh;
  const MetricField* fixed = nullptr;
  const MetricInterpolant* moving = nullptr;
  mutable std::vector<int> hints;

  EnergyModel(const SimplicialMesh& m, const MetricField* f, const MetricInterpolant* mv)
      : mesh(&m), fixed(f), moving(mv), hints(m.num_elements(), -1) {}

  std::array<Point, 4> points(const std::vector<Point>& x, std::size_t e) const {
    std::array<Point, 4> pts{};
    auto el = mesh->element(e);
    for (std::size_t i = 0; i < el.size(); ++i) pts[i] = x[el[i]];
    return pts;
  }

  double element(const std::vector<Point>& x, std::size_t e, std::array<Point, 4>* grad) const {
    return element_at(points(x, e), e, grad);
  }

  double element_at(const std::array<Point, 4>& pts, std::size_t e, std::array<Point, 4>* grad) const {
    const int d = mesh->dim();
    std::span<const Point> sp{pts.data(), static_cast<std::size_t>(d + 1)};
    if (fixed) return element_energy(d, sp, fixed->tensors[e], nullptr, grad);
    auto s = moving->evaluate(centroid(d, sp), hints[e]);
    hints[e] = s.element;
    return element_energy(d, sp, s.m, &s.grad, grad);
  }

  double total(const std::vector<Point>& x, std::vector<Point>* grad) const {
    const int d = mesh->dim();
    if (grad) grad->assign(x.size(), Point{0, 0, 0});
    double sum = 0;
    std::array<Point, 4> g{};
    for (std::size_t e = 0; e < mesh->num_elements(); ++e) {
      double v = element(x, e, grad ? &g : nullptr);
      if (!std::isfinite(v)) return kInf;
      sum += v;
      if (grad) {
        auto el = mesh->element(e);
        for (int i = 0; i <= d; ++i)
          for (int r = 0; r < d; ++r) (*grad)[el[i]][r] += g[i][r];
      }
    }
    return sum;
  }
};

double frob(const SmallMatrix& a, const SmallMatrix& b) { return (a.array() * b.array()).sum(); }

std::vector<Point> project(const std::vector<Point>& g, const std::vector<VertexConstraint>& cons, int d) {
  std::vector<Point> out(g.size(), Point{0, 0, 0});
  for (std::size_t i = 0; i < g.size(); ++i)
    for (int k = 0; k < cons[i].dofs; ++k) {
      double c = 0;
      for (int r = 0; r < d; ++r) c += cons[i].basis[k][r] * g[i][r];
      for (int r = 0; r < d; ++r) out[i][r] += c * cons[i].basis[k][r];
    }
  return out;
}

double min_quality(const SimplicialMesh& mesh) {
  double q = kInf;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    auto g = element_geometry(mesh, e);
    q = std::min(q, g.min_height / g.diameter);
  }
  return q;
}

bool all_positive(const SimplicialMesh& mesh, const std::vector<Point>& x) {
  const int d = mesh.dim();
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    std::array<Point, 4> pts{};
    auto el = mesh.element(e);
    double diam = 0;
    for (int i = 0; i <= d; ++i) pts[i] = x[el[i]];
    for (int i = 0; i <= d; ++i)
      for (int j = i + 1; j <= d; ++j) {
        double s = 0;
        for (int r = 0; r < d; ++r) s += (pts[i][r] - pts[j][r]) * (pts[i][r] - pts[j][r]);
        diam = std::max(diam, s);
      }
    diam = std::sqrt(diam);
    if (!(signed_volume(d, {pts.data(), static_cast<std::size_t>(d + 1)}) > 1e-13 * std::pow(diam, d))) return false;
  }
  return true;
}

}  // namespace

double element_energy(int d, std::span<const Point> pts, const SmallMatrix& m, const std::array<SmallMatrix, 3>* dm,
                      std::array<Point, 4>* grad) {
  SmallMatrix e(d, d);
  for (int i = 0; i < d; ++i)
    for (int r = 0; r < d; ++r) e(r, i) = pts[i + 1][r] - pts[0][r];
  const double dete = e.determinant();
  if (!(dete > 0)) return kInf;
  const double vol = dete / factorial(d);
  const double q = 0.75 * d;
  const double detm = m.determinant();
  if (!(detm > 0)) fail(ErrorCode::NumericalInconsistency, "metric tensor is not positive definite");
  const double rho = std::sqrt(detm);
  const SmallMatrix a = e.inverse();
  const SmallMatrix minv = m.inverse();
  const SmallMatrix& w = reference_gram(d);
  const SmallMatrix waminv = w * a * minv;  // W A M^-1
  const double t = (a * minv * a.transpose() * w).trace();
  const double cq = std::pow(static_cast<double>(d), q) / 3.0;
  const double tq = std::pow(t, q);
  const double term2 = cq * std::pow(rho * vol, 1.0 - q);
  const double energy = rho * vol * tq / 3.0 + term2;
  if (grad) {
    const SmallMatrix at = a.transpose();
    // dt/dE = -2 A^T W A M^-1 A^T
    const SmallMatrix dt_de = -2.0 * at * waminv * at;
    SmallMatrix dg = (rho / 3.0) * (tq * vol * at + vol * q * std::pow(t, q - 1) * dt_de) + (1.0 - q) * term2 * at;
    std::array<double, 3> dc{0, 0, 0};
    if (dm) {
      const SmallMatrix dt_dm = -(minv * at * w * a * minv);
      const SmallMatrix dg_dm = (vol / 3.0) * (tq * 0.5 * rho * minv + rho * q * std::pow(t, q - 1) * dt_dm) +
                                0.5 * (1.0 - q) * term2 * minv;
      for (int r = 0; r < d; ++r) dc[r] = frob(dg_dm, (*dm)[r]) / (d + 1);
    }
    auto& g = *grad;
    for (int r = 0; r < d; ++r) {
      double sum = 0;
      for (int i = 1; i <= d; ++i) {
        g[i][r] = dg(r, i - 1) + dc[r];
        sum += dg(r, i - 1);
      }
      g[0][r] = -sum + dc[r];
    }
  }
  return energy;
}

EnergyTerms mesh_energy_terms(const SimplicialMesh& mesh, const MetricField& metric) {
  const int d = mesh.dim();
  const double q = 0.75 * d;
  const SmallMatrix& w = reference_gram(d);
  EnergyTerms out;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    SmallMatrix ed(d, d);
    auto el = mesh.element(e);
    for (int i = 0; i < d; ++i)
      for (int r = 0; r < d; ++r) ed(r, i) = mesh.vertex(el[i + 1])[r] - mesh.vertex(el[0])[r];
    const double vol = ed.determinant() / factorial(d);
    if (!(vol > 0)) fail(ErrorCode::InvertedElement, "element " + std::to_string(e) + " is inverted");
    const SmallMatrix a = ed.inverse();
    const SmallMatrix& m = metric.tensors[e];
    const double rho = std::sqrt(m.determinant());
    const double t = (a * m.inverse() * a.transpose() * w).trace();
    out.alignment += rho * vol * std::pow(t, q) / 3.0;
    out.equidistribution += std::pow(static_cast<double>(d), q) / 3.0 * std::pow(rho * vol, 1.0 - q);
  }
  return out;
}

double mesh_energy(const SimplicialMesh& mesh, const MetricField& metric) {
  if (metric.tensors.size() != mesh.num_elements()) fail(ErrorCode::ParameterMismatch, "metric/mesh mismatch");
  EnergyModel model(mesh, &metric, nullptr);
  double v = model.total(mesh.vertices(), nullptr);
  if (!std::isfinite(v)) fail(ErrorCode::InvertedElement, "mesh has an inverted element");
  return v;
}

double mesh_energy(const SimplicialMesh& mesh, const MetricInterpolant& metric) {
  EnergyModel model(mesh, nullptr, &metric);
  double v = model.total(mesh.vertices(), nullptr);
  if (!std::isfinite(v)) fail(ErrorCode::InvertedElement, "mesh has an inverted element");
  return v;
}

std::vector<Point> energy_gradient(const SimplicialMesh& mesh, const MetricField& metric) {
  if (metric.tensors.size() != mesh.num_elements()) fail(ErrorCode::ParameterMismatch, "metric/mesh mismatch");
  EnergyModel model(mesh, &metric, nullptr);
  std::vector<Point> g;
  if (!std::isfinite(model.total(mesh.vertices(), &g))) fail(ErrorCode::InvertedElement, "mesh has an inverted element");
  return g;
}

std::vector<Point> energy_gradient(const SimplicialMesh& mesh, const MetricInterpolant& metric) {
  EnergyModel model(mesh, nullptr, &metric);
  std::vector<Point> g;
  if (!std::isfinite(model.total(mesh.vertices(), &g))) fail(ErrorCode::InvertedElement, "mesh has an inverted element");
  return g;
}

std::vector<VertexConstraint> vertex_constraints(const SimplicialMesh& mesh, BoundaryMotion motion) {
  const int d = mesh.dim();
  std::vector<VertexConstraint> cons(mesh.num_vertices());
  for (std::size_t i = 0; i < cons.size(); ++i) {
    if (mesh.is_boundary(i)) continue;
    cons[i].dofs = d;
    for (int k = 0; k < d; ++k) {
      cons[i].basis[k] = {0, 0, 0};
      cons[i].basis[k][k] = 1;
    }
  }
  if (motion == BoundaryMotion::fixed || d == 1) return cons;
  std::map<int, std::vector<Point>> normals;
  for (const auto& f : boundary_facets(mesh)) {
    Point n{0, 0, 0};
    const Point& a = mesh.vertex(f.vertices[0]);
    const Point& b = mesh.vertex(f.vertices[1]);
    if (d == 2) {
      n = {b[1] - a[1], a[0] - b[0], 0};
    } else {
      const Point& c = mesh.vertex(f.vertices[2]);
      Point u{b[0] - a[0], b[1] - a[1], b[2] - a[2]}, v{c[0] - a[0], c[1] - a[1], c[2] - a[2]};
      n = {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
    }
    double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
    for (double& c : n) c /= len;
    for (int v : f.vertices)
      if (v >= 0) normals[v].push_back(n);
  }
  for (auto& [v, ns] : normals) {
    if (!mesh.is_boundary(v)) continue;
    const Point& n0 = ns.front();
    bool flat = std::all_of(ns.begin(), ns.end(), [&](const Point& n) {
      return std::abs(n[0] * n0[0] + n[1] * n0[1] + n[2] * n0[2]) >= 1 - 1e-10;
    });
    if (!flat) continue;
    auto& c = cons[v];
    if (d == 2) {
      c.dofs = 1;
      c.basis[0] = {-n0[1], n0[0], 0};
    } else {
      Point t = std::abs(n0[0]) < 0.9 ? Point{1, 0, 0} : Point{0, 1, 0};
      double dp = t[0] * n0[0] + t[1] * n0[1] + t[2] * n0[2];
      for (int r = 0; r < 3; ++r) t[r] -= dp * n0[r];
      double len = std::sqrt(t[0] * t[0] + t[1] * t[1] + t[2] * t[2]);
      for (double& x : t) x /= len;
      Point s{n0[1] * t[2] - n0[2] * t[1], n0[2] * t[0] - n0[0] * t[2], n0[0] * t[1] - n0[1] * t[0]};
      c.dofs = 2;
      c.basis[0] = t;
      c.basis[1] = s;
    }
  }
  return cons;
}

std::vector<Point> vertex_velocities(const SimplicialMesh& mesh, const MetricField& metric, double tau,
                                     BoundaryMotion motion) {
  if (!(tau > 0)) fail(ErrorCode::InvalidParameter, "tau must be positive");
  MetricInterpolant interp(mesh, metric);
  auto g = energy_gradient(mesh, interp);
  const int d = mesh.dim();
  auto cons = vertex_constraints(mesh, motion);
  auto p = project(g, cons, d);
  const auto& vm = interp.vertex_metrics();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double f = -std::sqrt(vm[i].determinant()) / tau;
    for (int r = 0; r < d; ++r) p[i][r] *= f;
  }
  return p;
}

double equidistribution_ratio(const SimplicialMesh& mesh, const MetricInterpolant& metric) {
  const int d = mesh.dim();
  double lo = kInf, hi = 0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    std::array<Point, 4> pts{};
    auto el = mesh.element(e);
    for (int i = 0; i <= d; ++i) pts[i] = mesh.vertex(el[i]);
    auto s = metric.evaluate(centroid(d, {pts.data(), static_cast<std::size_t>(d + 1)}));
    double v = std::sqrt(s.m.determinant()) * element_geometry(mesh, e).volume;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi / lo;
}

MmpdeResult integrate_mmpde(const SimplicialMesh& mesh, const MetricField& metric, const MmpdeConfig& config) {
  if (!(config.tau > 0) || !(config.t_end > 0)) fail(ErrorCode::InvalidParameter, "tau and t_end must be positive");
  if (metric.tensors.size() != mesh.num_elements()) fail(ErrorCode::ParameterMismatch, "metric/mesh mismatch");
  const int d = mesh.dim();
  MetricInterpolant interp(mesh, metric);
  EnergyModel model(mesh, nullptr, &interp);
  auto cons = vertex_constraints(mesh, config.boundary);
  std::vector<int> offset(mesh.num_vertices() + 1, 0);
  for (std::size_t i = 0; i < cons.size(); ++i) offset[i + 1] = offset[i] + cons[i].dofs;
  const int ndof = offset.back();
  std::vector<int> dof_vertex(ndof);
  for (std::size_t i = 0; i < cons.size(); ++i)
    for (int k = offset[i]; k < offset[i + 1]; ++k) dof_vertex[k] = static_cast<int>(i);

  MmpdeResult res;
  std::vector<Point> x = mesh.vertices();
  double energy = model.total(x, nullptr);
  if (!std::isfinite(energy)) fail(ErrorCode::InvertedElement, "input mesh has an inverted element");
  res.energy_history.push_back(energy);
  const double hmin = mesh_stats(mesh).a_h;

  double t = 0, dt = config.dt_initial;
  bool stale = true;
  Eigen::VectorXd grad_r(ndof);
  std::vector<Eigen::Triplet<double>> hess;
  std::vector<double> pscale(ndof, 1.0);
  std::size_t steps = 0;
  // Vertices held in place for the current step: their elements crossed a kink of the
  // piecewise-linear metric on a rejected attempt.
  std::vector<char> frozen(mesh.num_vertices(), 0);
  std::vector<int> start_loc;
  while (t < config.t_end * (1 - 1e-14) && ndof > 0 && steps++ < config.max_steps) {
    if (stale) {
      std::vector<Point> g;
      model.total(x, &g);
      start_loc = model.hints;
      std::fill(frozen.begin(), frozen.end(), 0);
      for (std::size_t i = 0; i < cons.size(); ++i)
        for (int k = 0; k < cons[i].dofs; ++k) {
          double c = 0;
          for (int r = 0; r < d; ++r) c += cons[i].basis[k][r] * g[i][r];
          grad_r(offset[i] + k) = c;
        }
      for (std::size_t i = 0; i < cons.size(); ++i) {
        if (!cons[i].dofs) continue;
        double p = std::sqrt(interp.evaluate(x[i]).m.determinant());
        for (int k = 0; k < cons[i].dofs; ++k) pscale[offset[i] + k] = p;
      }
      // Element Hessians by central differences of the analytic element gradient.
      hess.clear();
      for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        auto el = mesh.element(e);
        auto pts = model.points(x, e);
        double diam = 0;
        for (int i = 0; i <= d; ++i)
          for (int j = i + 1; j <= d; ++j) {
            double s = 0;
            for (int r = 0; r < d; ++r) s += (pts[i][r] - pts[j][r]) * (pts[i][r] - pts[j][r]);
            diam = std::max(diam, std::sqrt(s));
          }
        const double h = 1e-6 * diam;
        // local reduced dofs: (vertex slot, basis k)
        for (int a = 0; a <= d; ++a) {
          const auto& ca = cons[el[a]];
          for (int ka = 0; ka < ca.dofs; ++ka) {
            std::array<Point, 4> gp{}, gm{};
            auto pp = pts, pm = pts;
            for (int r = 0; r < d; ++r) {
              pp[a][r] += h * ca.basis[ka][r];
              pm[a][r] -= h * ca.basis[ka][r];
            }
            model.element_at(pp, e, &gp);
            model.element_at(pm, e, &gm);
            for (int b = 0; b <= d; ++b) {
              const auto& cb = cons[el[b]];
              for (int kb = 0; kb < cb.dofs; ++kb) {
                double v = 0;
                for (int r = 0; r < d; ++r) v += cb.basis[kb][r] * (gp[b][r] - gm[b][r]);
                v /= 2 * h;
                // symmetrise by halves
                hess.emplace_back(offset[el[b]] + kb, offset[el[a]] + ka, 0.5 * v);
                hess.emplace_back(offset[el[a]] + ka, offset[el[b]] + kb, 0.5 * v);
              }
            }
          }
        }
      }
      stale = false;
    }
    const double step = std::min(dt, config.t_end - t);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(hess.size() + ndof);
    for (const auto& tr : hess)
      if (!frozen[dof_vertex[tr.row()]] && !frozen[dof_vertex[tr.col()]]) trip.push_back(tr);
    Eigen::VectorXd rhs = -grad_r;
    for (int k = 0; k < ndof; ++k) {
      if (frozen[dof_vertex[k]]) {
        trip.emplace_back(k, k, 1.0);
        rhs(k) = 0;
      } else {
        trip.emplace_back(k, k, config.tau / (pscale[k] * step));
      }
    }
    Eigen::SparseMatrix<double> k_mat(ndof, ndof);
    k_mat.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(k_mat);
    bool ok = ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 0;
    bool energy_rise = false;
    std::vector<Point> xn;
    double en = kInf, move = 0;
    if (ok) {
      Eigen::VectorXd delta = ldlt.solve(rhs);
      xn = x;
      for (std::size_t i = 0; i < cons.size(); ++i)
        for (int k = 0; k < cons[i].dofs; ++k)
          for (int r = 0; r < d; ++r) xn[i][r] += delta(offset[i] + k) * cons[i].basis[k][r];
      move = delta.cwiseAbs().maxCoeff();
      if (all_positive(mesh, xn)) en = model.total(xn, nullptr);
      ok = std::isfinite(en) && en <= energy;
      energy_rise = std::isfinite(en) && !ok;
      // A rise at rounding level means the flow has settled.
      if (energy_rise && en - energy <= 1e-13 * std::abs(energy)) {
        t = config.t_end;
        break;
      }
    }
    if (!ok) {
      ++res.rejected;
      bool refrozen = false;
      if (energy_rise) {
        for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
          if (model.hints[e] == start_loc[e]) continue;
          for (int v : mesh.element(e))
            if (!frozen[v] && cons[v].dofs) frozen[v] = refrozen = true;
        }
      }
      model.hints = start_loc;
      if (refrozen) continue;
      dt *= 0.5;
      if (dt < config.dt_min) {
        res.stalled = true;
        break;
      }
      continue;
    }
    ++res.accepted;
    t += step;
    x = std::move(xn);
    energy = en;
    res.energy_history.push_back(energy);
    stale = true;
    dt *= 2;
    if (move < 1e-12 * hmin) t = config.t_end;
  }
  res.time_reached = ndof > 0 ? t : config.t_end;
  res.mesh = mesh.with_vertices(std::move(x));
  res.min_quality = min_quality(res.mesh);
  res.quality_flag = res.min_quality < config.quality_floor;
  return res;
}

}  // namespace gofd
