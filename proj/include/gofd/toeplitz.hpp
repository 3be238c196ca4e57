#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "gofd/grid.hpp"
#include "gofd/symbol.hpp"

namespace gofd {

// A_FD applied through a circulant embedding of length L per axis.
class ToeplitzOperator {
 public:
  ToeplitzOperator(const OverlayGrid& grid, const SymbolCoefficients& symbol);
  ~ToeplitzOperator();
  ToeplitzOperator(ToeplitzOperator&&) noexcept;
  ToeplitzOperator& operator=(ToeplitzOperator&&) noexcept;

  const OverlayGrid& grid() const noexcept { return grid_; }
  const SymbolCoefficients& symbol() const noexcept { return symbol_; }
  int embedding_length() const noexcept { return length_; }
  std::size_t size() const noexcept { return grid_.num_nodes(); }
  // Real part of the embedded spectrum in r2c layout, and the largest discarded imaginary part.
  const std::vector<double>& spectrum() const noexcept { return spectrum_; }
  double spectrum_imaginary_residue() const noexcept { return max_imag_; }

  std::vector<double> apply(std::span<const double> u) const;
  void apply(std::span<const double> u, std::span<double> out) const;
  // h^(-2s) A_FD u
  std::vector<double> apply_fractional(std::span<const double> u, double h, double s) const;

 private:
  struct Plans;
  OverlayGrid grid_;
  SymbolCoefficients symbol_;
  int length_ = 0;
  std::vector<double> spectrum_;
  double max_imag_ = 0;
  std::unique_ptr<Plans> plans_;
};

ToeplitzOperator build_operator(const OverlayGrid& grid, const SymbolCoefficients& symbol);

int embedding_length(int n);

inline constexpr std::size_t kDenseBudget = 4096;

Eigen::MatrixXd dense_materialize(const SymbolCoefficients& symbol, int n, std::size_t budget = kDenseBudget);

}  // namespace gofd
