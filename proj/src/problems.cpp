#include "gofd/problems.hpp"

#include <cmath>
#include <limits>

#include "gofd/error.hpp"

namespace gofd {

double log_gamma(double x) {
  if (!(x > 0)) fail(ErrorCode::InvalidParameter, "log_gamma needs a positive argument");
  return std::lgamma(x);
}

double gamma_function(double x) { return std::exp(log_gamma(x)); }

double jacobi_polynomial(int k, double a, double b, double x) {
  if (k < 0 || !(a > -1) || !(b > -1)) fail(ErrorCode::InvalidParameter, "Jacobi polynomial needs k >= 0, a, b > -1");
  double p0 = 1.0;
  if (k == 0) return p0;
  double p1 = 0.5 * (a - b) + 0.5 * (a + b + 2) * x;
  for (int n = 2; n <= k; ++n) {
    const double c = 2.0 * n + a + b;
    const double a1 = 2.0 * n * (n + a + b) * (c - 2);
    const double a2 = (c - 1) * (a * a - b * b);
    const double a3 = (c - 2) * (c - 1) * c;
    const double a4 = 2.0 * (n + a - 1) * (n + b - 1) * c;
    const double p2 = ((a2 + a3 * x) * p1 - a4 * p0) / a1;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

BenchmarkProblem make_benchmark(int dim, double s, int k) {
  if (dim < 1 || dim > 3) fail(ErrorCode::InvalidParameter, "dimension must be 1, 2 or 3");
  if (!(s > 0 && s < 1)) fail(ErrorCode::InvalidParameter, "order s must lie in (0, 1)");
  if (k < 0) fail(ErrorCode::InvalidParameter, "degree k must be nonnegative");
  BenchmarkProblem p;
  p.dim = dim;
  p.s = s;
  p.k = k;
  const double half = 0.5 * dim;
  p.rhs_coefficient = std::exp(2 * s * std::log(2.0) + log_gamma(1 + s + k) + log_gamma(half + s + k) -
                               log_gamma(k + 1.0) - log_gamma(half + k));
  const double b = half - 1.0;
  auto r2 = [dim](const Point& x) {
    double s2 = 0;
    for (int i = 0; i < dim; ++i) s2 += x[i] * x[i];
    return s2;
  };
  const double c = p.rhs_coefficient;
  p.rhs = [=](const Point& x) { return c * jacobi_polynomial(k, s, b, 2 * r2(x) - 1); };
  p.exact = [=](const Point& x) {
    const double q = r2(x);
    if (q >= 1) return 0.0;
    return std::pow(1 - q, s) * jacobi_polynomial(k, s, b, 2 * q - 1);
  };
  return p;
}

ErrorNorms error_norms(const SimplicialMesh& mesh, std::span<const double> u_h, const ScalarField& exact) {
  if (u_h.size() != mesh.num_vertices()) fail(ErrorCode::ParameterMismatch, "solution length differs from vertex count");
  const int d = mesh.dim();
  ErrorNorms out;
  std::vector<double> err(mesh.num_vertices());
  for (std::size_t j = 0; j < mesh.num_vertices(); ++j) {
    err[j] = u_h[j] - exact(mesh.vertex(j));
    out.linf = std::max(out.linf, std::abs(err[j]));
  }
  const double w = 1.0 / (d + 2);
  double sum = 0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    auto el = mesh.element(e);
    Point c{0, 0, 0};
    double uc = 0, q = 0;
    for (int v : el) {
      for (int r = 0; r < d; ++r) c[r] += mesh.vertex(v)[r] / (d + 1);
      uc += u_h[v] / (d + 1);
      q += err[v] * err[v];
    }
    const double ec = uc - exact(c);
    q = w * q + w * ec * ec;
    sum += element_geometry(mesh, e).volume * q;
  }
  out.l2 = std::sqrt(sum);
  return out;
}

}  // namespace gofd
