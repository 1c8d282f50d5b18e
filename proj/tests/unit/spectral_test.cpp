// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "test_util.hpp"
#include "whisperconv/errors.hpp"
#include "whisperconv/spectral.hpp"
#include "whisperconv/synthetic_speech.hpp"

using namespace whisperconv;

namespace {

// Direct evaluation of the warped cosine series at one bin.
double series_at(const Vector& c, int bin, const AnalysisConfig& cfg) {
  const double omega = std::numbers::pi * bin / (cfg.bins() - 1);
  const double w = warp_frequency(omega, cfg.warp_alpha);
  double v = c[0];
  for (int n = 1; n < c.size(); ++n) v += 2.0 * c[n] * std::cos(n * w);
  return v;
}

}  // namespace

TEST_CASE("warp map is monotone and fixes 0 and pi") {
  const double a = 0.466;
  CHECK(warp_frequency(0.0, a) == doctest::Approx(0.0));
  CHECK(warp_frequency(std::numbers::pi, a) == doctest::Approx(std::numbers::pi));
  double prev = -1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double w = warp_frequency(std::numbers::pi * i / 1000.0, a);
    CHECK(w > prev);
    prev = w;
  }
  // Derivative against a central difference.
  for (double w : {0.1, 0.7, 1.9, 2.8}) {
    const double h = 1e-6;
    const double fd = (warp_frequency(w + h, a) - warp_frequency(w - h, a)) / (2 * h);
    CHECK(warp_derivative(w, a) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("one second at 24 kHz gives 200 frames and framing ignores content") {
  AnalysisConfig cfg;
  CHECK(frame_count(24000, 120) == 200);
  CHECK(frame_count(24001, 120) == 201);
  const Cepstrogram a = analyze(white_noise(1.0, 24000, 0.1, 1), cfg);
  const Cepstrogram b = analyze(sine_wave(300.0, 1.0, 24000), cfg);
  CHECK(a.num_frames() == 200);
  CHECK(b.num_frames() == 200);
  CHECK(a.frames.cols() == 80);
}

TEST_CASE("constant series maps to a constant envelope") {
  AnalysisConfig cfg;
  Vector c = Vector::Zero(80);
  c[0] = std::log(2.0);
  const LogSpectrum s = cepstrum_to_envelope(c, cfg);
  CHECK(s.bins.size() == 1025);
  CHECK((s.bins.array() - std::log(2.0)).abs().maxCoeff() < 1e-12);
  const Vector back = envelope_to_cepstrum(s, cfg);
  CHECK(back[0] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(back.tail(79).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("envelope evaluation matches the direct series and round trips") {
  AnalysisConfig cfg;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 0.3);
  for (int trial = 0; trial < 5; ++trial) {
    Vector c(80);
    for (int i = 0; i < 80; ++i) c[i] = g(rng) / (1.0 + 0.1 * i);
    const LogSpectrum s = cepstrum_to_envelope(c, cfg);
    for (int bin : {0, 1, 17, 300, 777, 1024}) CHECK(s.bins[bin] == doctest::Approx(series_at(c, bin, cfg)).epsilon(1e-10));
    const Vector back = envelope_to_cepstrum(s, cfg);
    CHECK((back - c).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("positive c1 tilts the envelope down across frequency") {
  AnalysisConfig cfg;
  Vector c = Vector::Zero(80);
  c[1] = 0.5;
  const LogSpectrum s = cepstrum_to_envelope(c, cfg);
  CHECK(s.bins[0] > 0.0);
  CHECK(s.bins[1024] < 0.0);
  for (int k = 1; k < 1025; ++k) CHECK(s.bins[k] <= s.bins[k - 1] + 1e-12);
}

TEST_CASE("silence hits the log floor") {
  AnalysisConfig cfg;
  const Cepstrogram c = analyze(Waveform{std::vector<double>(4800, 0.0), 24000}, cfg);
  CHECK(c.num_frames() == 40);
  CHECK((c.frames.col(0).array() - kLogFloor).abs().maxCoeff() < 1e-9);
  CHECK(c.frames.rightCols(79).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("gain shifts c0 by ln g only") {
  AnalysisConfig cfg;
  Waveform w = white_noise(0.5, 24000, 0.05, 4);
  Waveform w2 = w;
  for (double& s : w2.samples) s *= 3.0;
  const Cepstrogram a = analyze(w, cfg);
  const Cepstrogram b = analyze(w2, cfg);
  CHECK(((b.frames.col(0) - a.frames.col(0)).array() - std::log(3.0)).abs().maxCoeff() < 1e-6);
  CHECK((b.frames.rightCols(79) - a.frames.rightCols(79)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("flat magnitude frame yields only c0") {
  // A unit impulse at every frame center has |X| = w(center) = 1 for the
  // periodic Hann window; with hop == frame_len the frames see one impulse.
  AnalysisConfig cfg;
  cfg.frame_len = 1024;
  cfg.hop = 1024;
  cfg.fft_size = 2048;
  Waveform w{std::vector<double>(4096, 0.0), 24000};
  for (std::size_t i = 0; i < w.samples.size(); i += 1024) w.samples[i] = 0.5;
  const Cepstrogram c = analyze(w, cfg);
  for (int t = 0; t < c.num_frames(); ++t) {
    CHECK(c.frames(t, 0) == doctest::Approx(std::log(0.5)).epsilon(1e-9));
    CHECK(c.frames.row(t).tail(79).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("alpha = 0 reduces to the plain real cepstrum") {
  AnalysisConfig cfg;
  cfg.warp_alpha = 0.0;
  const Waveform w = white_noise(0.2, 24000, 0.1, 9);
  const Matrix logs = log_magnitude_frames(w, cfg);
  const Cepstrogram c = analyze(w, cfg);
  // Oracle: trapezoid cosine projection of the log spectrum.
  const int k = cfg.bins() - 1;
  for (int t : {0, 7, 20}) {
    for (int n : {0, 1, 5, 40, 79}) {
      double acc = 0.0;
      for (int b = 0; b <= k; ++b) {
        const double wgt = (b == 0 || b == k) ? 0.5 : 1.0;
        acc += wgt * logs(t, b) * std::cos(std::numbers::pi * n * b / k);
      }
      CHECK(c.frames(t, n) == doctest::Approx(acc / k).epsilon(1e-8));
    }
  }
}

TEST_CASE("sample rate mismatch is a config error") {
  CHECK_THROWS_AS(analyze(white_noise(0.1, 16000), AnalysisConfig{}), ConfigError);
  AnalysisConfig bad;
  bad.frame_len = 4096;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("cepstrogram file round trip and header") {
  testutil::TempDir dir("mcep");
  const Cepstrogram c = analyze(white_noise(0.3, 24000, 0.1, 2), AnalysisConfig{});
  write_cepstrogram(c, dir / "a.mcep");
  CHECK(std::filesystem::file_size(dir / "a.mcep") == 4 + 5 * 4 + c.frames.size() * 4);
  const Cepstrogram r = read_cepstrogram(dir / "a.mcep");
  CHECK(r.config == c.config);
  CHECK((r.frames - c.frames).cwiseAbs().maxCoeff() < 1e-5);
  std::ofstream(dir / "bad.mcep") << "MCEX";
  CHECK_THROWS_AS(read_cepstrogram(dir / "bad.mcep"), DecodeError);
}
