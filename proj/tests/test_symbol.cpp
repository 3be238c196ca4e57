#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <vector>

#include "gofd/error.hpp"
#include "gofd/problems.hpp"
#include "gofd/symbol.hpp"

using namespace gofd;
using doctest::Approx;
using std::numbers::pi;

namespace {

double binomial_form(double s, int p) {
  // (-1)^p Gamma(2s+1) / (Gamma(s+p+1) Gamma(s-p+1)) through the reflection-free product
  double t = gamma_function(2 * s + 1) / (gamma_function(s + 1) * gamma_function(s + 1));
  for (int j = 0; j < p; ++j) t *= (j - s) / (j + s + 1);
  return t;
}

}  // namespace

TEST_CASE("symbol point values") {
  for (double s : {0.1, 0.5, 0.9}) {
    const double zero[2] = {0, 0};
    CHECK(shifted_symbol_eval(2, s, zero) == Approx(std::pow(8.0, s)).epsilon(1e-14));
    const double xi = pi;
    CHECK(symbol_eval(1, s, {&xi, 1}) == Approx(std::pow(4.0, s)).epsilon(1e-14));
  }
}

TEST_CASE("analytic 1D coefficients for the square root") {
  auto t = symbol_1d_analytic(0.5, 4);
  CHECK(t.at({0, 0, 0}) == Approx(4 / pi).epsilon(1e-15));
  CHECK(t.at({1, 0, 0}) == Approx(-4 / (3 * pi)).epsilon(1e-15));
  CHECK(t.at({-1, 0, 0}) == t.at({1, 0, 0}));
  for (int p = 0; p <= 8; ++p) CHECK(t.at({p, 0, 0}) == Approx(4 / pi / (1 - 4.0 * p * p)).epsilon(1e-14));
  CHECK_THROWS_AS(t.at({9, 0, 0}), Error);
}

TEST_CASE("analytic 1D coefficients at s = 1 give the three-point stencil") {
  auto t = symbol_1d_analytic(1.0, 3);
  CHECK(t.at({0, 0, 0}) == Approx(2.0).epsilon(1e-15));
  CHECK(t.at({1, 0, 0}) == Approx(-1.0).epsilon(1e-15));
  for (int p = 2; p <= 6; ++p) CHECK(std::abs(t.at({p, 0, 0})) < 1e-15);
}

TEST_CASE("analytic 1D coefficients satisfy the gamma form and ratio identity") {
  for (double s : {0.05, 0.25, 0.5, 0.75, 0.99}) {
    auto t = symbol_1d_analytic(s, 10);
    double sum = 0;
    for (int p = 0; p <= 20; ++p) {
      CHECK(t.at({p, 0, 0}) == Approx(binomial_form(s, p)).epsilon(1e-12));
      if (p > 0) CHECK(t.at({p, 0, 0}) < 0);
      if (p < 20) CHECK(t.at({p + 1, 0, 0}) / t.at({p, 0, 0}) == Approx((p - s) / (p + s + 1)).epsilon(1e-13));
      sum += (p == 0 ? 1 : 2) * t.at({p, 0, 0});
    }
    CHECK(sum > 0);
  }
  CHECK_THROWS_AS(symbol_1d_analytic(0.0, 3), Error);
  CHECK_THROWS_AS(symbol_1d_analytic(1.2, 3), Error);
}

TEST_CASE("trapezoid and Filon match the analytic coefficients") {
  for (double s : {0.2, 0.5, 0.8}) {
    auto exact = symbol_1d_analytic(s, 8);
    auto trap = symbol_trapezoid(1, s, 8, 1 << 12);
    auto filon = symbol_filon_1d(s, 8, 1 << 12);
    for (int p = 0; p <= 16; ++p) {
      CHECK(std::abs(trap.at({p, 0, 0}) - exact.at({p, 0, 0})) < 1e-4);
      CHECK(std::abs(filon.at({p, 0, 0}) - exact.at({p, 0, 0})) < 1e-5);
    }
  }
}

TEST_CASE("Richardson extrapolation improves the trapezoid rule") {
  const double s = 0.5;
  auto exact = symbol_1d_analytic(s, 4);
  auto coarse = symbol_trapezoid(1, s, 4, 512);
  auto fine = symbol_trapezoid(1, s, 4, 1024);
  auto rich = richardson_extrapolate(coarse, fine);
  double e_fine = 0, e_rich = 0;
  for (int p = 0; p <= 8; ++p) {
    e_fine = std::max(e_fine, std::abs(fine.at({p, 0, 0}) - exact.at({p, 0, 0})));
    e_rich = std::max(e_rich, std::abs(rich.at({p, 0, 0}) - exact.at({p, 0, 0})));
  }
  CHECK(e_rich < e_fine);
  CHECK_THROWS_AS(richardson_extrapolate(coarse, symbol_trapezoid(1, s, 4, 4096)), Error);
  CHECK_THROWS_AS(richardson_extrapolate(coarse, symbol_trapezoid(1, 0.4, 4, 1024)), Error);
}

TEST_CASE("quadrature must resolve the offsets") {
  try {
    symbol_trapezoid(1, 0.5, 8, 16);
    FAIL("expected QuadratureTooCoarse");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::QuadratureTooCoarse);
  }
}

TEST_CASE("2D coefficients are symmetric and match the stencil at s = 1") {
  auto t = symbol_trapezoid(2, 0.4, 3, 256);
  for (int p = -6; p <= 6; ++p)
    for (int q = -6; q <= 6; ++q) {
      CHECK(t.at({p, q, 0}) == Approx(t.at({q, p, 0})).epsilon(1e-13));
      CHECK(t.at({p, q, 0}) == t.at({-p, q, 0}));
    }
  auto full = symbol_trapezoid(2, 0.4, 3, 256, TrapezoidPath::full_fft);
  auto sep = symbol_trapezoid(2, 0.4, 3, 256, TrapezoidPath::separable);
  for (std::size_t i = 0; i < full.values.size(); ++i) CHECK(full.values[i] == Approx(sep.values[i]).epsilon(1e-12));

  auto one = symbol_trapezoid(2, 1.0, 2, 64);
  CHECK(one.at({0, 0, 0}) == Approx(4.0).epsilon(1e-13));
  CHECK(one.at({1, 0, 0}) == Approx(-1.0).epsilon(1e-13));
  CHECK(one.at({0, 1, 0}) == Approx(-1.0).epsilon(1e-13));
  CHECK(std::abs(one.at({1, 1, 0})) < 1e-13);
  CHECK(std::abs(one.at({2, 0, 0})) < 1e-13);
}

TEST_CASE("multi-dimensional coefficients converge under refinement") {
  const double s = 0.5;
  auto a = symbol_multi_d(2, s, 4, 512, 2);
  auto b = symbol_multi_d(2, s, 4, 1024, 2);
  auto c = symbol_multi_d(2, s, 4, 2048, 2);
  double dab = 0, dbc = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    dab = std::max(dab, std::abs(a.values[i] - b.values[i]));
    dbc = std::max(dbc, std::abs(b.values[i] - c.values[i]));
  }
  CHECK(dbc < dab);
  CHECK(dbc < 1e-6);
  // the sum of all coefficients reproduces the symbol at the origin, which vanishes
  double total = 0;
  for (int p = -8; p <= 8; ++p)
    for (int q = -8; q <= 8; ++q) total += c.at({p, q, 0});
  CHECK(total < c.at({0, 0, 0}));
}

TEST_CASE("truncation keeps the leading coefficients") {
  auto t = symbol_1d_analytic(0.3, 6);
  auto small = truncate_symbol(t, 2);
  CHECK(small.n == 2);
  for (int p = 0; p <= 4; ++p) CHECK(small.at({p, 0, 0}) == t.at({p, 0, 0}));
  CHECK_THROWS_AS(truncate_symbol(t, 7), Error);
}

TEST_CASE("symbol cache round trip") {
  auto dir = std::filesystem::temp_directory_path() / "gofd_symbol_cache_test";
  std::filesystem::remove_all(dir);
  auto t = symbol_trapezoid(2, 0.3, 3, 128);
  auto path = dir / "t.bin";
  write_symbol_cache(path, t);
  auto r = read_symbol_cache(path);
  CHECK(r.dim == t.dim);
  CHECK(r.s == t.s);
  CHECK(r.n == t.n);
  CHECK(r.quadrature_points == t.quadrature_points);
  CHECK(r.method == t.method);
  CHECK(r.values == t.values);

  SymbolCache cache(dir);
  SymbolRequest req{1, 0.5, 5, SymbolMethod::analytic1d, 0, 1};
  auto first = cache.get(req);
  CHECK(std::filesystem::exists(dir / symbol_cache_name(req)));
  req.n = 3;
  auto smaller = cache.get(req);
  CHECK(smaller.n == 3);
  for (int p = 0; p <= 6; ++p) CHECK(smaller.at({p, 0, 0}) == first.at({p, 0, 0}));
  std::filesystem::remove_all(dir);
}

TEST_CASE("method names") {
  CHECK(parse_symbol_method("filon") == SymbolMethod::filon);
  CHECK_THROWS_AS(parse_symbol_method("simpson"), Error);
  CHECK(default_symbol_request(1, 0.5, 4).method == SymbolMethod::analytic1d);
  CHECK(default_symbol_request(2, 0.5, 4).method != SymbolMethod::analytic1d);
}
