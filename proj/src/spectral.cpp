// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "whisperconv/spectral.hpp"

#include <algorithm>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

#include "whisperconv/binary_io.hpp"
#include "whisperconv/errors.hpp"
#include "whisperconv/fft.hpp"

namespace whisperconv {

void AnalysisConfig::validate() const {
  if (sample_rate <= 0) throw ConfigError("sample_rate must be positive");
  if (frame_len <= 0 || hop <= 0) throw ConfigError("frame_len and hop must be positive");
  if (fft_size < frame_len) throw ConfigError("frame_len must not exceed fft_size");
  if (fft_size % 2 != 0) throw ConfigError("fft_size must be even");
  if (order < 1 || order > bins()) throw ConfigError("order must be in [1, fft_size/2 + 1]");
  if (!(warp_alpha > -1.0 && warp_alpha < 1.0)) throw ConfigError("warp_alpha must lie in (-1, 1)");
}

double warp_frequency(double omega, double alpha) {
  return omega + 2.0 * std::atan2(alpha * std::sin(omega), 1.0 - alpha * std::cos(omega));
}

double warp_derivative(double omega, double alpha) {
  return (1.0 - alpha * alpha) / (1.0 + alpha * alpha - 2.0 * alpha * std::cos(omega));
}

int frame_count(std::size_t num_samples, int hop) {
  return static_cast<int>((num_samples + static_cast<std::size_t>(hop) - 1) / static_cast<std::size_t>(hop));
}

Vector hann_window(int length) {
  Vector w(length);
  for (int i = 0; i < length; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / length);
  }
  return w;
}

CepstralTransform::CepstralTransform(const AnalysisConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const int bins = cfg_.bins();
  const int order = cfg_.order;
  basis_.resize(bins, order);
  Vector sqrt_weight(bins);
  for (int k = 0; k < bins; ++k) {
    const double omega = std::numbers::pi * k / (bins - 1);
    const double warped = warp_frequency(omega, cfg_.warp_alpha);
    basis_(k, 0) = 1.0;
    for (int n = 1; n < order; ++n) basis_(k, n) = 2.0 * std::cos(n * warped);
    double wk = warp_derivative(omega, cfg_.warp_alpha);
    if (k == 0 || k == bins - 1) wk *= 0.5;
    sqrt_weight[k] = std::sqrt(wk);
  }
  Eigen::MatrixXd weighted = sqrt_weight.asDiagonal() * basis_;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(weighted);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(bins, order);
  Eigen::MatrixXd rhs = q.transpose() * sqrt_weight.asDiagonal();
  projection_ = qr.matrixQR()
                    .topLeftCorner(order, order)
                    .triangularView<Eigen::Upper>()
                    .solve(rhs);
}

Vector CepstralTransform::envelope(const Eigen::Ref<const Vector>& cepstrum) const {
  if (cepstrum.size() != cfg_.order) throw DimensionError("cepstrum length does not match order");
  return basis_ * cepstrum;
}

Vector CepstralTransform::cepstrum(const Eigen::Ref<const Vector>& log_spectrum) const {
  if (log_spectrum.size() != cfg_.bins()) throw DimensionError("log spectrum has wrong bin count");
  return projection_ * log_spectrum;
}

Matrix CepstralTransform::envelopes(const Matrix& cepstra) const {
  if (cepstra.cols() != cfg_.order) throw DimensionError("cepstrum length does not match order");
  return cepstra * basis_.transpose();
}

Matrix CepstralTransform::cepstra(const Matrix& log_spectra) const {
  if (log_spectra.cols() != cfg_.bins()) throw DimensionError("log spectrum has wrong bin count");
  return log_spectra * projection_.transpose();
}

const CepstralTransform& cepstral_transform(const AnalysisConfig& cfg) {
  thread_local std::optional<CepstralTransform> cached;
  if (!cached || !(cached->config() == cfg)) cached.emplace(cfg);
  return *cached;
}

namespace {

std::size_t reflect_index(std::int64_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<std::int64_t>(2 * (n - 1));
  i %= period;
  if (i < 0) i += period;
  if (i >= static_cast<std::int64_t>(n)) i = period - i;
  return static_cast<std::size_t>(i);
}

}  // namespace

Matrix log_magnitude_frames(const Waveform& w, const AnalysisConfig& cfg) {
  cfg.validate();
  if (w.sample_rate != cfg.sample_rate) {
    throw ConfigError("waveform sample rate " + std::to_string(w.sample_rate) +
                      " does not match analysis rate " + std::to_string(cfg.sample_rate));
  }
  const int frames = frame_count(w.samples.size(), cfg.hop);
  const Vector window = hann_window(cfg.frame_len);
  RealFft fft(cfg.fft_size);
  std::vector<double> buf(static_cast<std::size_t>(cfg.frame_len));
  std::vector<std::complex<double>> spec(static_cast<std::size_t>(cfg.bins()));
  Matrix out(frames, cfg.bins());
  const std::size_t n = w.samples.size();
  for (int t = 0; t < frames; ++t) {
    const std::int64_t start = static_cast<std::int64_t>(t) * cfg.hop - cfg.frame_len / 2;
    for (int j = 0; j < cfg.frame_len; ++j) {
      buf[j] = w.samples[reflect_index(start + j, n)] * window[j];
    }
    fft.forward(buf, spec);
    for (int k = 0; k < cfg.bins(); ++k) {
      out(t, k) = std::log(std::max(std::abs(spec[k]), kMagnitudeFloor));
    }
  }
  return out;
}

Cepstrogram analyze(const Waveform& w, const AnalysisConfig& cfg) {
  Cepstrogram c;
  c.config = cfg;
  Matrix logmag = log_magnitude_frames(w, cfg);
  c.frames = logmag.rows() > 0 ? cepstral_transform(cfg).cepstra(logmag) : Matrix(0, cfg.order);
  return c;
}

LogSpectrum cepstrum_to_envelope(const Eigen::Ref<const Vector>& c, const AnalysisConfig& cfg) {
  return LogSpectrum{cepstral_transform(cfg).envelope(c), cfg.sample_rate};
}

Vector envelope_to_cepstrum(const LogSpectrum& s, const AnalysisConfig& cfg) {
  return cepstral_transform(cfg).cepstrum(s.bins);
}

void write_cepstrogram(const Cepstrogram& c, const std::filesystem::path& path) {
  BinaryWriter out;
  out.magic("MCEP");
  out.u32(kCepstrogramFormatVersion);
  out.u32(static_cast<std::uint32_t>(c.frames.rows()));
  out.u32(static_cast<std::uint32_t>(c.frames.cols()));
  out.u32(static_cast<std::uint32_t>(c.config.hop));
  out.u32(static_cast<std::uint32_t>(c.config.sample_rate));
  for (Eigen::Index t = 0; t < c.frames.rows(); ++t) {
    for (Eigen::Index d = 0; d < c.frames.cols(); ++d) out.f32(static_cast<float>(c.frames(t, d)));
  }
  out.save(path);
}

Cepstrogram read_cepstrogram(const std::filesystem::path& path, const AnalysisConfig& base) {
  auto in = BinaryReader::open(path);
  in.expect_magic("MCEP");
  const std::uint32_t version = in.u32();
  if (version != kCepstrogramFormatVersion) {
    throw DecodeError(path.string() + ": unsupported MCEP version " + std::to_string(version));
  }
  const std::uint32_t frames = in.u32();
  const std::uint32_t order = in.u32();
  Cepstrogram c;
  c.config = base;
  c.config.hop = static_cast<int>(in.u32());
  c.config.sample_rate = static_cast<int>(in.u32());
  c.config.order = static_cast<int>(order);
  c.config.validate();
  c.frames.resize(frames, order);
  for (std::uint32_t t = 0; t < frames; ++t) {
    for (std::uint32_t d = 0; d < order; ++d) c.frames(t, d) = in.f32();
  }
  return c;
}

}  // namespace whisperconv
