// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <memory>

#include "whisperconv/audio_io.hpp"

namespace whisperconv {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Floor applied to magnitudes before the logarithm.
inline constexpr double kMagnitudeFloor = 1e-10;
inline const double kLogFloor = std::log(kMagnitudeFloor);

/// Framing and mel-cepstrum parameters. Defaults: 50 ms Hann windows, 5 ms
/// hop, 80 coefficients c0..c79 at 24 kHz.
struct AnalysisConfig {
  int sample_rate = 24000;
  int frame_len = 1200;
  int hop = 120;
  int fft_size = 2048;
  int order = 80;
  double warp_alpha = 0.466;

  int bins() const { return fft_size / 2 + 1; }
  double bin_hz() const { return static_cast<double>(sample_rate) / fft_size; }
  void validate() const;
  bool operator==(const AnalysisConfig&) const = default;
};

/// T x order matrix of mel-cepstral frames (natural-log amplitude domain).
struct Cepstrogram {
  Matrix frames;
  AnalysisConfig config;

  int num_frames() const { return static_cast<int>(frames.rows()); }
};

/// Natural-log magnitude on the uniform FFT grid, fft_size/2 + 1 bins.
struct LogSpectrum {
  Vector bins;
  int sample_rate = 24000;
};

/// All-pass frequency warp, omega in [0, pi]. Its inverse is the same map
/// with -alpha.
double warp_frequency(double omega, double alpha);
/// d(warped)/d(omega).
double warp_derivative(double omega, double alpha);

/// Number of centered frames for a signal of `num_samples`: ceil(n / hop).
int frame_count(std::size_t num_samples, int hop);

/// Precomputed basis for moving between warped cepstra and log envelopes on
/// the linear FFT grid. The envelope is
///   L(omega) = c0 + 2 * sum_{n >= 1} c_n cos(n * warp(omega)),
/// and the cepstrum of an envelope is its weighted least-squares projection
/// onto that basis, with weights d(warp)/d(omega) so that the fit is uniform
/// along the warped axis. The projection is an exact left inverse of the
/// envelope map.
class CepstralTransform {
 public:
  explicit CepstralTransform(const AnalysisConfig& cfg);

  const AnalysisConfig& config() const { return cfg_; }
  Vector envelope(const Eigen::Ref<const Vector>& cepstrum) const;
  Vector cepstrum(const Eigen::Ref<const Vector>& log_spectrum) const;
  // Row-wise versions over a frame matrix.
  Matrix envelopes(const Matrix& cepstra) const;
  Matrix cepstra(const Matrix& log_spectra) const;

 private:
  AnalysisConfig cfg_;
  Matrix basis_;       // bins x order
  Matrix projection_;  // order x bins
};

/// Shared per-thread transform for `cfg`, rebuilt only when cfg changes.
const CepstralTransform& cepstral_transform(const AnalysisConfig& cfg);

/// Periodic Hann window.
Vector hann_window(int length);

/// Per-frame natural-log magnitude spectra (T x bins) with centered,
/// reflect-padded framing.
Matrix log_magnitude_frames(const Waveform& w, const AnalysisConfig& cfg);

Cepstrogram analyze(const Waveform& w, const AnalysisConfig& cfg);
LogSpectrum cepstrum_to_envelope(const Eigen::Ref<const Vector>& c, const AnalysisConfig& cfg);
Vector envelope_to_cepstrum(const LogSpectrum& s, const AnalysisConfig& cfg);

/// MCEP file: "MCEP", u32 version, T, order, hop, sample_rate, then T x order
/// float32 little-endian, row-major.
inline constexpr std::uint32_t kCepstrogramFormatVersion = 1;
void write_cepstrogram(const Cepstrogram& c, const std::filesystem::path& path);
/// Fields absent from the file (frame_len, fft_size, warp_alpha) come from
/// `base`; hop, order and sample_rate come from the header.
Cepstrogram read_cepstrogram(const std::filesystem::path& path,
                             const AnalysisConfig& base = AnalysisConfig{});

}  // namespace whisperconv
