#include "fft.hpp"

#include <functional>
#include <mutex>
#include <new>

#include "gofd/error.hpp"

namespace gofd::fft {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::size_t product(const std::vector<int>& dims) {
  std::size_t n = 1;
  for (int d : dims) n *= static_cast<std::size_t>(d);
  return n;
}

std::size_t half_product(const std::vector<int>& dims) {
  std::size_t n = 1;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) n *= static_cast<std::size_t>(dims[i]);
  return n * static_cast<std::size_t>(dims.back() / 2 + 1);
}

fftw_plan checked(fftw_plan p) {
  if (!p) fail(ErrorCode::NumericalInconsistency, "FFTW failed to create a plan");
  return p;
}

}  // namespace

RealBuffer alloc_real(std::size_t n) {
  auto* p = static_cast<double*>(fftw_malloc(sizeof(double) * (n ? n : 1)));
  if (!p) throw std::bad_alloc();
  return RealBuffer(p);
}

ComplexBuffer alloc_complex(std::size_t n) {
  auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n ? n : 1)));
  if (!p) throw std::bad_alloc();
  return ComplexBuffer(p);
}

Plan::~Plan() {
  if (plan_) {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
}

Plan& Plan::operator=(Plan&& other) noexcept {
  if (this != &other) {
    if (plan_) {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan_);
    }
    plan_ = other.plan_;
    other.plan_ = nullptr;
  }
  return *this;
}

Plan Plan::r2c(const std::vector<int>& dims) {
  auto in = alloc_real(product(dims));
  auto out = alloc_complex(half_product(dims));
  std::lock_guard lock(planner_mutex());
  return Plan(checked(fftw_plan_dft_r2c(static_cast<int>(dims.size()), dims.data(), in.get(), out.get(),
                                        FFTW_ESTIMATE)));
}

Plan Plan::c2r(const std::vector<int>& dims) {
  auto in = alloc_complex(half_product(dims));
  auto out = alloc_real(product(dims));
  std::lock_guard lock(planner_mutex());
  return Plan(checked(fftw_plan_dft_c2r(static_cast<int>(dims.size()), dims.data(), in.get(), out.get(),
                                        FFTW_ESTIMATE)));
}

Plan Plan::c2c(const std::vector<int>& dims, int sign) {
  auto in = alloc_complex(product(dims));
  auto out = alloc_complex(product(dims));
  std::lock_guard lock(planner_mutex());
  return Plan(checked(fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), in.get(), out.get(), sign,
                                    FFTW_ESTIMATE)));
}

Plan Plan::redft00(int n) {
  auto in = alloc_real(n);
  auto out = alloc_real(n);
  std::lock_guard lock(planner_mutex());
  return Plan(checked(fftw_plan_r2r_1d(n, in.get(), out.get(), FFTW_REDFT00, FFTW_ESTIMATE)));
}

}  // namespace gofd::fft
