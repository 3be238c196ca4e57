#include "gofd/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fft.hpp"
#include "gofd/error.hpp"

namespace gofd {

namespace {

void check_order(double s) {
  if (!(s > 0 && s <= 1)) fail(ErrorCode::InvalidOrder, "order s must lie in (0, 1], got " + std::to_string(s));
}

void check_dim(int dim) {
  if (dim < 1 || dim > 3) fail(ErrorCode::InvalidParameter, "dimension must be 1, 2 or 3");
}

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

SymbolCoefficients make_empty(int dim, double s, int n, std::int64_t m, SymbolMethod method) {
  SymbolCoefficients c;
  c.dim = dim;
  c.s = s;
  c.n = n;
  c.quadrature_points = m;
  c.method = method;
  c.values.assign(ipow(2 * n + 1, dim), 0.0);
  return c;
}

// (-1)^{sum p} for the orthant entry at linear position k.
double orthant_sign(std::size_t k, int dim, int extent) {
  int parity = 0;
  for (int r = 0; r < dim; ++r) {
    parity += static_cast<int>(k % extent);
    k /= extent;
  }
  return parity % 2 ? -1.0 : 1.0;
}

void check_quadrature(int n, std::int64_t m) {
  if (m < 2 * static_cast<std::int64_t>(n) + 1)
    fail(ErrorCode::QuadratureTooCoarse,
         "quadrature points M=" + std::to_string(m) + " below 2N+1=" + std::to_string(2 * n + 1));
}

// 4 cos^2(pi j / M) for j in [0, count)
std::vector<double> cos2_table(std::int64_t m, std::int64_t count) {
  std::vector<double> t(count);
  for (std::int64_t j = 0; j < count; ++j) {
    double c = std::cos(std::numbers::pi * static_cast<double>(j) / static_cast<double>(m));
    t[j] = 4.0 * c * c;
  }
  return t;
}

SymbolCoefficients trapezoid_full(int dim, double s, int n, std::int64_t m) {
  const std::size_t total = ipow(static_cast<std::size_t>(m), dim);
  auto buf = fft::alloc_complex(total);
  auto tab = cos2_table(m, m);
  const auto mi = static_cast<std::size_t>(m);
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t rem = k;
    double sum = 0;
    for (int r = 0; r < dim; ++r) {
      sum += tab[rem % mi];
      rem /= mi;
    }
    buf[k][0] = std::pow(sum, s);
    buf[k][1] = 0.0;
  }
  std::vector<int> dims(dim, static_cast<int>(m));
  auto plan = fft::Plan::c2c(dims, FFTW_BACKWARD);
  {
    auto spec = fft::alloc_complex(total);
    plan.c2c(buf.get(), spec.get());
    buf = std::move(spec);
  }

  auto out = make_empty(dim, s, n, m, SymbolMethod::trapezoid);
  const int extent = out.extent();
  const double scale = 1.0 / static_cast<double>(total);
  double max_imag = 0;
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    std::size_t rem = k, src = 0;
    std::size_t stride = 1;
    for (int r = dim - 1; r >= 0; --r) {
      src += (rem % extent) * stride;
      rem /= extent;
      stride *= mi;
    }
    out.values[k] = orthant_sign(k, dim, extent) * buf[src][0] * scale;
    max_imag = std::max(max_imag, std::abs(buf[src][1]) * scale);
  }
  if (max_imag > 1e-10 * std::abs(out.values[0]))
    fail(ErrorCode::NumericalInconsistency, "imaginary residue " + std::to_string(max_imag) + " after inverse FFT");
  return out;
}

// Even-symmetric trapezoid sum evaluated axis by axis with DCT-I on M/2+1 samples.
class SeparableTrapezoid {
 public:
  SeparableTrapezoid(double s, int n, std::int64_t m)
      : s_(s), extent_(2 * n + 1), len_(static_cast<int>(m / 2 + 1)),
        tab_(cos2_table(m, m / 2 + 1)), plan_(fft::Plan::redft00(len_)),
        in_(fft::alloc_real(len_)), out_(fft::alloc_real(len_)) {}

  // Result over [0, extent)^dim for the sub-tensor with leading coordinates fixed (partial sum `base`).
  std::vector<double> transform(int axes, double base) {
    std::vector<double> res(ipow(extent_, axes));
    if (axes == 1) {
      for (int j = 0; j < len_; ++j) in_[j] = std::pow(base + tab_[j], s_);
      plan_.r2r(in_.get(), out_.get());
      std::copy(out_.get(), out_.get() + extent_, res.begin());
      return res;
    }
    const std::size_t inner = ipow(extent_, axes - 1);
    std::vector<double> z(static_cast<std::size_t>(len_) * inner);
    for (int j = 0; j < len_; ++j) {
      auto slab = transform(axes - 1, base + tab_[j]);
      std::copy(slab.begin(), slab.end(), z.begin() + static_cast<std::ptrdiff_t>(j * inner));
    }
    for (std::size_t q = 0; q < inner; ++q) {
      for (int j = 0; j < len_; ++j) in_[j] = z[j * inner + q];
      plan_.r2r(in_.get(), out_.get());
      for (int p = 0; p < extent_; ++p) res[p * inner + q] = out_[p];
    }
    return res;
  }

 private:
  double s_;
  int extent_;
  int len_;
  std::vector<double> tab_;
  fft::Plan plan_;
  fft::RealBuffer in_, out_;
};

std::size_t separable_bytes(int dim, int n, std::int64_t m) {
  std::size_t b = 0;
  const std::size_t len = static_cast<std::size_t>(m / 2 + 1), ext = 2 * n + 1;
  for (int a = 1; a <= dim; ++a) b += len * ipow(ext, a - 1) + ipow(ext, a);
  return 8 * b;
}

SymbolCoefficients trapezoid_separable(int dim, double s, int n, std::int64_t m) {
  SeparableTrapezoid t(s, n, m);
  auto out = make_empty(dim, s, n, m, SymbolMethod::trapezoid);
  auto y = t.transform(dim, 0.0);
  const double scale = std::pow(static_cast<double>(m), -dim);
  for (std::size_t k = 0; k < y.size(); ++k) out.values[k] = orthant_sign(k, dim, out.extent()) * y[k] * scale;
  return out;
}

SymbolCoefficients combine(const SymbolCoefficients& coarse, const SymbolCoefficients& fine, double factor) {
  SymbolCoefficients out = fine;
  out.method = SymbolMethod::richardson;
  out.levels = std::max(coarse.levels, fine.levels) + 1;
  for (std::size_t k = 0; k < out.values.size(); ++k)
    out.values[k] = (factor * fine.values[k] - coarse.values[k]) / (factor - 1.0);
  return out;
}

}  // namespace

const char* to_string(SymbolMethod method) {
  switch (method) {
    case SymbolMethod::analytic1d: return "analytic";
    case SymbolMethod::trapezoid: return "trapezoid";
    case SymbolMethod::filon: return "filon";
    case SymbolMethod::richardson: return "richardson";
  }
  return "?";
}

SymbolMethod parse_symbol_method(const std::string& name) {
  if (name == "analytic" || name == "analytic1d") return SymbolMethod::analytic1d;
  if (name == "trapezoid") return SymbolMethod::trapezoid;
  if (name == "filon") return SymbolMethod::filon;
  if (name == "richardson") return SymbolMethod::richardson;
  fail(ErrorCode::InvalidParameter, "unknown symbol method '" + name + "'");
}

double SymbolCoefficients::at(const MultiIndex& p) const {
  std::size_t k = 0;
  for (int r = 0; r < dim; ++r) {
    int a = std::abs(p[r]);
    if (a > 2 * n) fail(ErrorCode::IndexOutOfRange, "symbol offset beyond 2N");
    k = k * extent() + a;
  }
  return values[k];
}

double symbol_eval(int dim, double s, std::span<const double> xi) {
  double sum = 0;
  for (int r = 0; r < dim; ++r) {
    double h = std::sin(0.5 * xi[r]);
    sum += 4.0 * h * h;
  }
  return std::pow(sum, s);
}

double shifted_symbol_eval(int dim, double s, std::span<const double> xi) {
  double sum = 0;
  for (int r = 0; r < dim; ++r) {
    double c = std::cos(std::numbers::pi * xi[r]);
    sum += 4.0 * c * c;
  }
  return std::pow(sum, s);
}

SymbolCoefficients symbol_1d_analytic(double s, int n) {
  check_order(s);
  if (n < 0) fail(ErrorCode::InvalidParameter, "N must be nonnegative");
  auto out = make_empty(1, s, n, 0, SymbolMethod::analytic1d);
  out.values[0] = std::exp(std::lgamma(2 * s + 1) - 2 * std::lgamma(s + 1));
  for (int p = 0; p + 1 < out.extent(); ++p) out.values[p + 1] = out.values[p] * (p - s) / (p + s + 1);
  return out;
}

SymbolCoefficients symbol_trapezoid(int dim, double s, int n, std::int64_t m, TrapezoidPath path) {
  check_order(s);
  check_dim(dim);
  check_quadrature(n, m);
  if (path == TrapezoidPath::automatic)
    path = (m % 2 == 0 && ipow(static_cast<std::size_t>(m), dim) > (std::size_t{1} << 22)) ? TrapezoidPath::separable
                                                                                            : TrapezoidPath::full_fft;
  if (path == TrapezoidPath::separable) {
    if (m % 2) fail(ErrorCode::InvalidParameter, "separable trapezoid path needs an even M");
    return trapezoid_separable(dim, s, n, m);
  }
  if (std::pow(static_cast<double>(m), dim) * 16.0 > static_cast<double>(kDefaultQuadratureBudget))
    fail(ErrorCode::QuadratureTooLarge, "full FFT trapezoid tensor exceeds the memory budget");
  return trapezoid_full(dim, s, n, m);
}

SymbolCoefficients symbol_filon_1d(double s, int n, std::int64_t m) {
  check_order(s);
  check_quadrature(n, m);
  if (static_cast<double>(m) * 32.0 > static_cast<double>(kDefaultQuadratureBudget))
    fail(ErrorCode::QuadratureTooLarge, "Filon sample vector exceeds the memory budget");
  auto tab = cos2_table(m, m);
  std::vector<double> psi(m);
  for (std::int64_t j = 0; j < m; ++j) psi[j] = std::pow(tab[j], s);
  auto buf = fft::alloc_complex(m);
  const double md = static_cast<double>(m);
  for (std::int64_t j = 0; j < m; ++j) {
    double next = psi[(j + 1) % m], prev = psi[(j + m - 1) % m];
    buf[j][0] = md * (next - 2.0 * psi[j] + prev);
    buf[j][1] = 0.0;
  }
  auto plan = fft::Plan::c2c({static_cast<int>(m)}, FFTW_BACKWARD);
  {
    auto spec = fft::alloc_complex(m);
    plan.c2c(buf.get(), spec.get());
    buf = std::move(spec);
  }
  auto out = make_empty(1, s, n, m, SymbolMethod::filon);
  double t0 = 0;
  for (double v : psi) t0 += v;
  out.values[0] = t0 / md;
  for (int p = 1; p < out.extent(); ++p) {
    double w = 2.0 * std::numbers::pi * p;
    out.values[p] = (p % 2 ? 1.0 : -1.0) * buf[p][0] / (w * w);
  }
  return out;
}

SymbolCoefficients richardson_extrapolate(const SymbolCoefficients& coarse, const SymbolCoefficients& fine) {
  if (coarse.dim != fine.dim || coarse.s != fine.s || coarse.n != fine.n || coarse.method != fine.method ||
      fine.quadrature_points != 2 * coarse.quadrature_points || coarse.values.size() != fine.values.size())
    fail(ErrorCode::ParameterMismatch, "Richardson extrapolation needs matching (d, s, N, method) and fine M = 2 coarse M");
  return combine(coarse, fine, 4.0);
}

std::int64_t default_quadrature_points(int dim) {
  switch (dim) {
    case 1: return std::int64_t{1} << 12;
    case 2: return std::int64_t{1} << 14;
    default: return std::int64_t{1} << 11;
  }
}

SymbolCoefficients symbol_multi_d(int dim, double s, int n, std::int64_t m, int levels, std::size_t memory_budget) {
  check_order(s);
  check_dim(dim);
  if (levels < 1) fail(ErrorCode::InvalidParameter, "levels must be at least 1");
  if (m <= 0) {
    m = default_quadrature_points(dim);
    // Keep the coarsest level comfortably above 2N+1.
    while ((m >> (levels - 1)) < 4 * (2 * static_cast<std::int64_t>(n) + 1)) m *= 2;
  }
  const std::int64_t coarsest = m >> (levels - 1);
  check_quadrature(n, coarsest);
  if ((coarsest << (levels - 1)) != m) fail(ErrorCode::InvalidParameter, "M must be divisible by 2^(levels-1)");
  const bool separable = m % 2 == 0 && ipow(static_cast<std::size_t>(m), dim) > (std::size_t{1} << 22);
  const std::size_t need = separable ? separable_bytes(dim, n, m) : ipow(static_cast<std::size_t>(m), dim) * 16;
  if (need > memory_budget)
    fail(ErrorCode::QuadratureTooLarge,
         "symbol quadrature needs " + std::to_string(need) + " bytes, budget " + std::to_string(memory_budget));

  std::vector<SymbolCoefficients> row;
  for (int l = 0; l < levels; ++l) row.push_back(symbol_trapezoid(dim, s, n, coarsest << l));
  for (double factor = 4.0; row.size() > 1; factor *= 4.0) {
    std::vector<SymbolCoefficients> next;
    for (std::size_t i = 0; i + 1 < row.size(); ++i) next.push_back(combine(row[i], row[i + 1], factor));
    row = std::move(next);
  }
  auto out = std::move(row.front());
  out.method = levels == 1 ? SymbolMethod::trapezoid : SymbolMethod::richardson;
  out.levels = levels;
  out.quadrature_points = m;
  return out;
}

SymbolRequest default_symbol_request(int dim, double s, int n) {
  SymbolRequest r;
  r.dim = dim;
  r.s = s;
  r.n = n;
  r.method = dim == 1 ? SymbolMethod::analytic1d : SymbolMethod::richardson;
  r.m = 0;
  r.levels = 2;
  return r;
}

SymbolCoefficients compute_symbol(const SymbolRequest& r) {
  check_dim(r.dim);
  switch (r.method) {
    case SymbolMethod::analytic1d:
      if (r.dim != 1) fail(ErrorCode::InvalidParameter, "the analytic symbol exists only in 1D");
      return symbol_1d_analytic(r.s, r.n);
    case SymbolMethod::trapezoid:
      return symbol_trapezoid(r.dim, r.s, r.n, r.m > 0 ? r.m : default_quadrature_points(r.dim));
    case SymbolMethod::filon:
      if (r.dim != 1) fail(ErrorCode::InvalidParameter, "Filon symbol is implemented in 1D only");
      return symbol_filon_1d(r.s, r.n, r.m > 0 ? r.m : std::int64_t{1} << 11);
    case SymbolMethod::richardson: {
      if (r.dim == 1) {
        std::int64_t m = r.m > 0 ? r.m : std::int64_t{1} << 11;
        auto out = richardson_extrapolate(symbol_filon_1d(r.s, r.n, m / 2), symbol_filon_1d(r.s, r.n, m));
        out.levels = 2;
        return out;
      }
      return symbol_multi_d(r.dim, r.s, r.n, r.m, r.levels);
    }
  }
  fail(ErrorCode::InvalidParameter, "unknown symbol method");
}

SymbolCoefficients truncate_symbol(const SymbolCoefficients& sym, int n) {
  if (n > sym.n) fail(ErrorCode::ParameterMismatch, "cannot extend a symbol to a larger N");
  if (n == sym.n) return sym;
  SymbolCoefficients out = sym;
  out.n = n;
  out.values.assign(ipow(2 * n + 1, sym.dim), 0.0);
  const int ext = 2 * n + 1;
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    MultiIndex p{0, 0, 0};
    std::size_t rem = k;
    for (int r = sym.dim - 1; r >= 0; --r) {
      p[r] = static_cast<int>(rem % ext);
      rem /= ext;
    }
    out.values[k] = sym.at(p);
  }
  return out;
}

}  // namespace gofd
