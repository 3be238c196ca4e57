#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "gofd/grid.hpp"

namespace gofd {

enum class SymbolMethod : std::uint32_t { analytic1d = 0, trapezoid = 1, filon = 2, richardson = 3 };

const char* to_string(SymbolMethod method);
SymbolMethod parse_symbol_method(const std::string& name);

// Fourier coefficients T_p of the discrete symbol over the nonnegative orthant p in [0,2N]^d.
struct SymbolCoefficients {
  int dim = 0;
  double s = 0;
  int n = 0;
  std::int64_t quadrature_points = 0;  // finest M, 0 for the analytic path
  SymbolMethod method = SymbolMethod::analytic1d;
  int levels = 1;
  std::vector<double> values;

  int extent() const noexcept { return 2 * n + 1; }
  // Any signed offset with |p_i| <= 2N; signs are folded by the even symmetry.
  double at(const MultiIndex& p) const;
};

// (sum_i 4 sin^2(xi_i / 2))^s
double symbol_eval(int dim, double s, std::span<const double> xi);
// (sum_i 4 cos^2(pi xi_i))^s, i.e. symbol_eval at 2*pi*xi + pi.
double shifted_symbol_eval(int dim, double s, std::span<const double> xi);

SymbolCoefficients symbol_1d_analytic(double s, int n);

enum class TrapezoidPath { automatic, full_fft, separable };

SymbolCoefficients symbol_trapezoid(int dim, double s, int n, std::int64_t m,
                                    TrapezoidPath path = TrapezoidPath::automatic);
SymbolCoefficients symbol_filon_1d(double s, int n, std::int64_t m);
SymbolCoefficients richardson_extrapolate(const SymbolCoefficients& coarse, const SymbolCoefficients& fine);

std::int64_t default_quadrature_points(int dim);
inline constexpr std::size_t kDefaultQuadratureBudget = std::size_t{1} << 31;  // bytes

// Trapezoid at M, M/2, ..., M/2^(levels-1) combined by repeated Richardson extrapolation.
SymbolCoefficients symbol_multi_d(int dim, double s, int n, std::int64_t m = 0, int levels = 2,
                                  std::size_t memory_budget = kDefaultQuadratureBudget);

struct SymbolRequest {
  int dim = 1;
  double s = 0.5;
  int n = 1;
  SymbolMethod method = SymbolMethod::analytic1d;
  std::int64_t m = 0;  // 0 picks the default for the dimension
  int levels = 2;
};

// Default request: analytic in 1D, trapezoid + Richardson otherwise.
SymbolRequest default_symbol_request(int dim, double s, int n);
SymbolCoefficients compute_symbol(const SymbolRequest& request);

// Little-endian binary cache file.
void write_symbol_cache(const std::filesystem::path& path, const SymbolCoefficients& sym);
SymbolCoefficients read_symbol_cache(const std::filesystem::path& path);
std::string symbol_cache_name(const SymbolRequest& request);

// Memoises symbols in memory and optionally on disk. Coefficients do not depend on N,
// so a request is served from any cached entry with a larger N.
class SymbolCache {
 public:
  SymbolCache() = default;
  explicit SymbolCache(std::filesystem::path directory) : directory_(std::move(directory)) {}

  SymbolCoefficients get(const SymbolRequest& request);
  const std::filesystem::path& directory() const noexcept { return directory_; }

 private:
  std::filesystem::path directory_;
  std::mutex mutex_;
  std::map<std::tuple<int, double, int, std::int64_t, int>, std::shared_ptr<const SymbolCoefficients>> memory_;
};

// Restrict to a smaller N (prefix of each axis).
SymbolCoefficients truncate_symbol(const SymbolCoefficients& sym, int n);

}  // namespace gofd
