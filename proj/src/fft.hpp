#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

namespace gofd::fft {

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

using RealBuffer = std::unique_ptr<double[], FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

RealBuffer alloc_real(std::size_t n);
ComplexBuffer alloc_complex(std::size_t n);

// Owning wrapper for an FFTW plan created under a global planner lock with FFTW_ESTIMATE.
// Execution uses the new-array interface, so one plan serves any fftw_malloc'd buffers.
class Plan {
 public:
  Plan() = default;
  ~Plan();
  Plan(Plan&& other) noexcept : plan_(other.plan_) { other.plan_ = nullptr; }
  Plan& operator=(Plan&& other) noexcept;
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;

  static Plan r2c(const std::vector<int>& dims);
  static Plan c2r(const std::vector<int>& dims);
  static Plan c2c(const std::vector<int>& dims, int sign);
  static Plan redft00(int n);

  void r2c(double* in, fftw_complex* out) const { fftw_execute_dft_r2c(plan_, in, out); }
  void c2r(fftw_complex* in, double* out) const { fftw_execute_dft_c2r(plan_, in, out); }
  void c2c(fftw_complex* in, fftw_complex* out) const { fftw_execute_dft(plan_, in, out); }
  void r2r(double* in, double* out) const { fftw_execute_r2r(plan_, in, out); }

 private:
  explicit Plan(fftw_plan p) : plan_(p) {}
  fftw_plan plan_ = nullptr;
};

}  // namespace gofd::fft
