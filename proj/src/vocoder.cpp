// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "whisperconv/vocoder.hpp"

#include <algorithm>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "whisperconv/errors.hpp"
#include "whisperconv/fft.hpp"

namespace whisperconv {
namespace {
// exp() guard for runaway converted cepstra; peak normalization follows.
constexpr double kMaxLogEnvelope = 30.0;
}  // namespace

void SynthesisConfig::validate() const {
  if (!(gain > 0.0) || !std::isfinite(gain)) throw ConfigError("synthesis gain must be positive");
}

Waveform synthesize(const Cepstrogram& c, const SynthesisConfig& cfg) {
  cfg.validate();
  const AnalysisConfig& a = c.config;
  a.validate();
  if (c.frames.cols() != a.order) throw DimensionError("cepstrogram width does not match order");

  const int frames = c.num_frames();
  Waveform out;
  out.sample_rate = a.sample_rate;
  out.samples.assign(static_cast<std::size_t>(frames) * a.hop, 0.0);
  if (frames == 0) return out;

  const Vector window = hann_window(a.frame_len);
  const double window_energy = window.squaredNorm();
  // Overlap-add normalization: sum over frames of the squared window.
  const double ola_norm = window_energy / a.hop;
  // The log-periodogram of Gaussian noise sits gamma/2 below the log of its
  // expected magnitude; undo that and the hop/window energy ratio so that
  // analyze(synthesize(c)) ~ c.
  const double level = std::exp(std::numbers::egamma / 2.0) *
                       std::sqrt(ola_norm / window_energy) * cfg.gain;

  const CepstralTransform& xf = cepstral_transform(a);
  const Matrix envelopes = xf.envelopes(c.frames);

  RealFft fft(a.fft_size);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> noise(static_cast<std::size_t>(a.fft_size));
  std::vector<std::complex<double>> spec(static_cast<std::size_t>(a.bins()));
  std::vector<double> shaped(static_cast<std::size_t>(a.fft_size));

  const auto total = static_cast<std::int64_t>(out.samples.size());
  for (int t = 0; t < frames; ++t) {
    for (double& v : noise) v = gauss(rng);
    fft.forward(noise, spec);
    for (int k = 0; k < a.bins(); ++k) spec[k] *= level * std::exp(std::min(envelopes(t, k), kMaxLogEnvelope));
    fft.inverse(spec, shaped);
    const std::int64_t start = static_cast<std::int64_t>(t) * a.hop - a.frame_len / 2;
    for (int j = 0; j < a.frame_len; ++j) {
      const std::int64_t n = start + j;
      if (n < 0 || n >= total) continue;
      out.samples[static_cast<std::size_t>(n)] += window[j] * shaped[j];
    }
  }
  double peak = 0.0;
  for (double& s : out.samples) {
    s /= ola_norm;
    if (!std::isfinite(s)) s = 0.0;
    peak = std::max(peak, std::abs(s));
  }
  if (peak > 1.0) {
    const double scale = 0.95 / peak;
    for (double& s : out.samples) s *= scale;
  }
  return out;
}

Waveform copy_synthesis(const Waveform& w, const AnalysisConfig& analysis,
                        const SynthesisConfig& synthesis) {
  return synthesize(analyze(w, analysis), synthesis);
}

}  // namespace whisperconv
