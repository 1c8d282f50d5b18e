// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "whisperconv/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

#include "whisperconv/errors.hpp"

namespace whisperconv {
namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct RealFft::Impl {
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (inv) fftw_destroy_plan(inv);
    fftw_free(real);
    fftw_free(spec);
  }
};

RealFft::RealFft(int size) : size_(size), impl_(std::make_unique<Impl>()) {
  if (size < 2) throw ConfigError("FFT size must be at least 2");
  std::lock_guard lock(planner_mutex());
  impl_->real = fftw_alloc_real(static_cast<std::size_t>(size));
  impl_->spec = fftw_alloc_complex(static_cast<std::size_t>(size / 2 + 1));
  impl_->fwd = fftw_plan_dft_r2c_1d(size, impl_->real, impl_->spec, FFTW_ESTIMATE);
  impl_->inv = fftw_plan_dft_c2r_1d(size, impl_->spec, impl_->real, FFTW_ESTIMATE);
}

RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) {
  if (out.size() < static_cast<std::size_t>(bins())) throw DimensionError("FFT output too small");
  const std::size_t n = std::min(in.size(), static_cast<std::size_t>(size_));
  std::copy_n(in.begin(), n, impl_->real);
  std::fill(impl_->real + n, impl_->real + size_, 0.0);
  fftw_execute(impl_->fwd);
  for (int k = 0; k < bins(); ++k) out[k] = {impl_->spec[k][0], impl_->spec[k][1]};
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
  if (in.size() < static_cast<std::size_t>(bins())) throw DimensionError("FFT input too small");
  if (out.size() < static_cast<std::size_t>(size_)) throw DimensionError("FFT output too small");
  for (int k = 0; k < bins(); ++k) {
    impl_->spec[k][0] = in[k].real();
    impl_->spec[k][1] = in[k].imag();
  }
  fftw_execute(impl_->inv);
  const double scale = 1.0 / size_;
  for (int i = 0; i < size_; ++i) out[i] = impl_->real[i] * scale;
}

}  // namespace whisperconv
