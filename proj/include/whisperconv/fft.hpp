// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace whisperconv {

// Real-to-complex FFT of a fixed size. Not shareable between threads; create
// one per worker. Plan creation is serialized internally.
class RealFft {
 public:
  explicit RealFft(int size);
  ~RealFft();
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const { return size_; }
  int bins() const { return size_ / 2 + 1; }

  // `in` is zero-padded (or truncated) to size(); `out` receives bins() values.
  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  // Unnormalized inverse scaled by 1/size(), so inverse(forward(x)) == x.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  struct Impl;
  int size_ = 0;
  std::unique_ptr<Impl> impl_;
};

}  // namespace whisperconv
