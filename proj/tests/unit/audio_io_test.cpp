// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "test_util.hpp"
#include "whisperconv/audio_io.hpp"
#include "whisperconv/errors.hpp"
#include "whisperconv/synthetic_speech.hpp"

using namespace whisperconv;

TEST_CASE("pcm16 full scale decodes to 32767/32768") {
  auto bytes = testutil::wav_header(1, 16000, 16, 1, 8);
  for (int i = 0; i < 4; ++i) {
    bytes.push_back(0xff);
    bytes.push_back(0x7f);
  }
  const Waveform w = decode_wav(bytes);
  REQUIRE(w.samples.size() == 4);
  for (double s : w.samples) CHECK(s == 32767.0 / 32768.0);
  CHECK(w.sample_rate == 16000);
}

TEST_CASE("stereo channels are averaged") {
  auto bytes = testutil::wav_header(2, 24000, 16, 1, 4 * 3);
  for (int i = 0; i < 3; ++i) {
    const std::int16_t l = 16384, r = -16384;
    bytes.push_back(static_cast<unsigned char>(l & 0xff));
    bytes.push_back(static_cast<unsigned char>((l >> 8) & 0xff));
    bytes.push_back(static_cast<unsigned char>(r & 0xff));
    bytes.push_back(static_cast<unsigned char>((r >> 8) & 0xff));
  }
  const Waveform w = decode_wav(bytes);
  REQUIRE(w.samples.size() == 3);
  for (double s : w.samples) CHECK(s == 0.0);
}

TEST_CASE("float32 input is decoded and clamped") {
  auto bytes = testutil::wav_header(1, 48000, 32, 3, 8);
  const float vals[2] = {0.25f, 3.0f};
  const auto* p = reinterpret_cast<const unsigned char*>(vals);
  bytes.insert(bytes.end(), p, p + 8);
  const Waveform w = decode_wav(bytes);
  REQUIRE(w.samples.size() == 2);
  CHECK(w.samples[0] == 0.25);
  CHECK(w.samples[1] == 1.0);
}

TEST_CASE("malformed and unsupported files raise the right errors") {
  std::vector<unsigned char> junk{'R', 'I', 'F', 'X', 0, 0};
  CHECK_THROWS_AS(decode_wav(junk), DecodeError);
  auto alaw = testutil::wav_header(1, 8000, 8, 6, 0);
  CHECK_THROWS_AS(decode_wav(alaw), UnsupportedFormatError);
  auto pcm24 = testutil::wav_header(1, 8000, 24, 1, 0);
  CHECK_THROWS_AS(decode_wav(pcm24), UnsupportedFormatError);
  CHECK_THROWS_AS(read_wav("/nonexistent/file.wav"), IoError);
}

TEST_CASE("header sample rate and length pass through") {
  testutil::TempDir dir("audio");
  Waveform w = sine_wave(440.0, 1.0, 48000, 0.3);
  write_wav(w, dir / "a.wav");
  const Waveform r = read_wav(dir / "a.wav");
  CHECK(r.sample_rate == 48000);
  CHECK(r.samples.size() == 48000);
}

TEST_CASE("write/read round trip within one quantization step and clipping") {
  testutil::TempDir dir("audio");
  Waveform w;
  w.sample_rate = 24000;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) w.samples.push_back(u(rng));
  w.samples.push_back(1.5);
  w.samples.push_back(-1.5);
  write_wav(w, dir / "rt.wav");
  const Waveform r = read_wav(dir / "rt.wav");
  REQUIRE(r.samples.size() == w.samples.size());
  for (std::size_t i = 0; i < 1000; ++i) CHECK(std::abs(r.samples[i] - w.samples[i]) <= 1.0 / 32768.0);
  const auto bytes = encode_wav_pcm16(w);
  const std::size_t data = bytes.size() - 4;
  CHECK(bytes[data] == 0xff);
  CHECK(bytes[data + 1] == 0x7f);  // +32767
  CHECK(bytes[data + 2] == 0x00);
  CHECK(bytes[data + 3] == 0x80);  // -32768
}

TEST_CASE("empty waveform writes a valid zero-length file") {
  testutil::TempDir dir("audio");
  write_wav(Waveform{{}, 24000}, dir / "empty.wav");
  const Waveform r = read_wav(dir / "empty.wav");
  CHECK(r.samples.empty());
  CHECK(r.sample_rate == 24000);
  CHECK(std::filesystem::file_size(dir / "empty.wav") == 44);
}

TEST_CASE("resample identity and duration") {
  const Waveform w = white_noise(0.3, 44100, 0.1, 1);
  const Waveform same = resample(w, 44100);
  CHECK(same.samples == w.samples);
  for (int rate : {8000, 16000, 22050, 24000, 48000}) {
    const Waveform r = resample(w, rate);
    CHECK(r.sample_rate == rate);
    const double d = std::abs(r.duration() - w.duration());
    CHECK(d <= 1.0 / rate + 1e-12);
  }
}

TEST_CASE("1 kHz tone survives 48k to 24k with frequency and amplitude kept") {
  const Waveform in = sine_wave(1000.0, 1.0, 48000, 0.5);
  const Waveform out = resample(in, 24000);
  const Waveform ref = sine_wave(1000.0, 1.0, 24000, 0.5);
  REQUIRE(out.samples.size() == ref.samples.size());
  // Compare the interior to an analytic tone; edges see the zero padding.
  const std::size_t a = 1000, b = out.samples.size() - 1000;
  double err = 0.0, energy = 0.0;
  for (std::size_t i = a; i < b; ++i) {
    err += std::pow(out.samples[i] - ref.samples[i], 2);
    energy += ref.samples[i] * ref.samples[i];
  }
  CHECK(std::sqrt(err / energy) < 0.01);
  std::vector<double> mid(out.samples.begin() + static_cast<long>(a), out.samples.begin() + static_cast<long>(b));
  CHECK(testutil::tone_amplitude(mid, 1000.0, 24000) == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("13 kHz tone is removed when going to 24 kHz, 11 kHz is kept") {
  const Waveform hi = sine_wave(13000.0, 0.5, 48000, 0.5);
  const Waveform out = resample(hi, 24000);
  const std::size_t a = 600, b = out.samples.size() - 600;
  CHECK(testutil::rms(out.samples, a, b) < 0.05 * testutil::rms(hi.samples));

  const Waveform lo = sine_wave(11000.0, 0.5, 48000, 0.5);
  const Waveform kept = resample(lo, 24000);
  CHECK(testutil::rms(kept.samples, a, b) == doctest::Approx(testutil::rms(lo.samples)).epsilon(0.05));
}

TEST_CASE("upsampling keeps a tone at its frequency") {
  const Waveform in = sine_wave(3000.0, 0.5, 16000, 0.4);
  const Waveform out = resample(in, 24000);
  CHECK(out.samples.size() == 12000);
  std::vector<double> mid(out.samples.begin() + 1000, out.samples.end() - 1000);
  CHECK(testutil::tone_amplitude(mid, 3000.0, 24000) == doctest::Approx(0.4).epsilon(0.01));
  CHECK(testutil::tone_amplitude(mid, 5000.0, 24000) < 1e-3);
}
