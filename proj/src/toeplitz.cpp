#include "gofd/toeplitz.hpp"

#include <algorithm>
#include <cmath>

#include "fft.hpp"
#include "gofd/error.hpp"

namespace gofd {

struct ToeplitzOperator::Plans {
  fft::Plan forward;
  fft::Plan backward;
};

namespace {

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

int embedding_length(int n) {
  int l = 1;
  while (l < 4 * n + 2) l *= 2;
  return l;
}

ToeplitzOperator::ToeplitzOperator(const OverlayGrid& grid, const SymbolCoefficients& symbol)
    : grid_(grid), symbol_(symbol), length_(gofd::embedding_length(grid.n())), plans_(std::make_unique<Plans>()) {
  if (symbol.dim != grid.dim() || symbol.n != grid.n())
    fail(ErrorCode::ParameterMismatch, "symbol (d=" + std::to_string(symbol.dim) + ", N=" + std::to_string(symbol.n) +
                                           ") does not match grid (d=" + std::to_string(grid.dim()) +
                                           ", N=" + std::to_string(grid.n()) + ")");
  const int d = grid.dim(), n = grid.n(), l = length_;
  std::vector<int> dims(d, l);
  plans_->forward = fft::Plan::r2c(dims);
  plans_->backward = fft::Plan::c2r(dims);

  const std::size_t total = ipow(l, d);
  auto gen = fft::alloc_real(total);
  // Circulant offset of index k along one axis, or -1 when the generator vanishes there.
  auto offset = [n, l](int k) { return k <= 2 * n ? k : (k >= l - 2 * n ? l - k : -1); };
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t rem = k;
    MultiIndex p{0, 0, 0};
    bool zero = false;
    for (int r = d - 1; r >= 0; --r) {
      int o = offset(static_cast<int>(rem % l));
      rem /= l;
      if (o < 0) zero = true;
      p[r] = o;
    }
    gen[k] = zero ? 0.0 : symbol.at(p);
  }
  const std::size_t half = total / l * (l / 2 + 1);
  auto spec = fft::alloc_complex(half);
  plans_->forward.r2c(gen.get(), spec.get());
  spectrum_.resize(half);
  double scale = 0;
  for (std::size_t k = 0; k < half; ++k) scale = std::max(scale, std::abs(spec[k][0]));
  for (std::size_t k = 0; k < half; ++k) {
    spectrum_[k] = spec[k][0] / static_cast<double>(total);
    max_imag_ = std::max(max_imag_, std::abs(spec[k][1]));
  }
  max_imag_ = scale > 0 ? max_imag_ / scale : max_imag_;
  if (max_imag_ > 1e-12)
    fail(ErrorCode::NumericalInconsistency, "circulant spectrum is not real (relative residue " +
                                                std::to_string(max_imag_) + ")");
}

ToeplitzOperator::~ToeplitzOperator() = default;
ToeplitzOperator::ToeplitzOperator(ToeplitzOperator&&) noexcept = default;
ToeplitzOperator& ToeplitzOperator::operator=(ToeplitzOperator&&) noexcept = default;

void ToeplitzOperator::apply(std::span<const double> u, std::span<double> out) const {
  const std::size_t nn = grid_.num_nodes();
  if (u.size() != nn || out.size() != nn)
    fail(ErrorCode::ParameterMismatch, "grid vector length " + std::to_string(u.size()) + ", expected " +
                                           std::to_string(nn));
  const int d = grid_.dim(), l = length_, w = grid_.nodes_per_axis();
  const std::size_t total = ipow(l, d);
  const std::size_t half = total / l * (l / 2 + 1);
  auto buf = fft::alloc_real(total);
  auto spec = fft::alloc_complex(half);
  std::fill(buf.get(), buf.get() + total, 0.0);
  // Input block sits at the origin corner of the circulant frame; output is read from the same window.
  auto frame_index = [&](std::size_t k) {
    std::size_t rem = k, idx = 0, stride = 1;
    for (int r = d - 1; r >= 0; --r) {
      idx += (rem % w) * stride;
      rem /= w;
      stride *= l;
    }
    return idx;
  };
  for (std::size_t k = 0; k < nn; ++k) buf[frame_index(k)] = u[k];
  plans_->forward.r2c(buf.get(), spec.get());
  for (std::size_t k = 0; k < half; ++k) {
    spec[k][0] *= spectrum_[k];
    spec[k][1] *= spectrum_[k];
  }
  plans_->backward.c2r(spec.get(), buf.get());
  for (std::size_t k = 0; k < nn; ++k) out[k] = buf[frame_index(k)];
}

std::vector<double> ToeplitzOperator::apply(std::span<const double> u) const {
  std::vector<double> out(grid_.num_nodes());
  apply(u, out);
  return out;
}

std::vector<double> ToeplitzOperator::apply_fractional(std::span<const double> u, double h, double s) const {
  auto out = apply(u);
  const double f = std::pow(h, -2.0 * s);
  for (double& v : out) v *= f;
  return out;
}

ToeplitzOperator build_operator(const OverlayGrid& grid, const SymbolCoefficients& symbol) {
  return ToeplitzOperator(grid, symbol);
}

Eigen::MatrixXd dense_materialize(const SymbolCoefficients& symbol, int n, std::size_t budget) {
  const int d = symbol.dim, w = 2 * n + 1;
  if (n > symbol.n) fail(ErrorCode::ParameterMismatch, "symbol holds fewer offsets than requested");
  const std::size_t size = ipow(w, d);
  if (size > budget)
    fail(ErrorCode::DenseTooLarge, "dense matrix of size " + std::to_string(size) + " exceeds budget " +
                                       std::to_string(budget));
  auto multi = [&](std::size_t k) {
    MultiIndex m{0, 0, 0};
    for (int r = d - 1; r >= 0; --r) {
      m[r] = static_cast<int>(k % w);
      k /= w;
    }
    return m;
  };
  Eigen::MatrixXd a(size, size);
  for (std::size_t i = 0; i < size; ++i) {
    auto mi = multi(i);
    for (std::size_t j = 0; j < size; ++j) {
      auto mj = multi(j);
      a(i, j) = symbol.at({mi[0] - mj[0], mi[1] - mj[1], mi[2] - mj[2]});
    }
  }
  return a;
}

}  // namespace gofd
