// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "whisperconv/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>
#include <string>

#include "whisperconv/errors.hpp"

namespace whisperconv {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
}

struct FormatChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
};

}  // namespace

Waveform decode_wav(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw DecodeError("not a RIFF/WAVE stream");
  }
  FormatChunk fmt;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* id = bytes.data() + pos;
    std::size_t size = read_u32(bytes.data() + pos + 4);
    std::size_t body = pos + 8;
    std::size_t available = bytes.size() - body;
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16 || size > available) throw DecodeError("truncated fmt chunk");
      const unsigned char* p = bytes.data() + body;
      fmt.format = read_u16(p);
      fmt.channels = read_u16(p + 2);
      fmt.sample_rate = read_u32(p + 4);
      fmt.bits = read_u16(p + 14);
      if (fmt.format == kFormatExtensible) {
        if (size < 40) throw DecodeError("truncated WAVE_FORMAT_EXTENSIBLE chunk");
        fmt.format = read_u16(p + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      // Streaming writers leave the size at 0xFFFFFFFF; take what is there.
      data = bytes.data() + body;
      data_size = std::min(size, available);
      break;
    }
    if (size > available) throw DecodeError("chunk overruns file");
    pos = body + size + (size & 1);
  }
  if (!have_fmt) throw DecodeError("missing fmt chunk");
  if (data == nullptr) throw DecodeError("missing data chunk");
  if (fmt.channels == 0) throw DecodeError("zero channels");
  if (fmt.sample_rate == 0) throw DecodeError("zero sample rate");

  const bool pcm16 = fmt.format == kFormatPcm && fmt.bits == 16;
  const bool float32 = fmt.format == kFormatFloat && fmt.bits == 32;
  if (!pcm16 && !float32) {
    throw UnsupportedFormatError("unsupported WAVE encoding: format tag " +
                                 std::to_string(fmt.format) + ", " + std::to_string(fmt.bits) +
                                 " bits");
  }
  const std::size_t bytes_per_sample = fmt.bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * fmt.channels;
  const std::size_t frames = data_size / frame_bytes;

  Waveform w;
  w.sample_rate = static_cast<int>(fmt.sample_rate);
  w.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < fmt.channels; ++c) {
      const unsigned char* p = data + i * frame_bytes + c * bytes_per_sample;
      if (pcm16) {
        acc += static_cast<std::int16_t>(read_u16(p)) / 32768.0;
      } else {
        std::uint32_t raw = read_u32(p);
        float f;
        std::memcpy(&f, &raw, sizeof f);
        acc += std::isfinite(f) ? std::clamp(static_cast<double>(f), -1.0, 1.0) : 0.0;
      }
    }
    w.samples[i] = acc / fmt.channels;
  }
  return w;
}

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes);
  } catch (const DecodeError& e) {
    throw DecodeError(path.string() + ": " + e.what());
  } catch (const UnsupportedFormatError& e) {
    throw UnsupportedFormatError(path.string() + ": " + e.what());
  }
}

std::vector<unsigned char> encode_wav_pcm16(const Waveform& w) {
  if (w.sample_rate <= 0) throw ConfigError("sample rate must be positive");
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_bytes);
  for (double s : w.samples) {
    double scaled = std::isfinite(s) ? std::round(s * 32768.0) : 0.0;
    auto q = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    put_u16(out, static_cast<std::uint16_t>(q));
  }
  return out;
}

void write_wav(const Waveform& w, const std::filesystem::path& path) {
  auto bytes = encode_wav_pcm16(w);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

namespace {

// Zero crossings of the lowpass kernel on each side, counted at the lower rate.
constexpr int kHalfZeroCrossings = 32;
constexpr double kKaiserBeta = 8.0;

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

double kaiser(double x, double beta) {
  if (std::abs(x) >= 1.0) return 0.0;
  return std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - x * x)) / std::cyl_bessel_i(0.0, beta);
}

}  // namespace

Waveform resample(const Waveform& w, int target_rate) {
  if (target_rate <= 0) throw ConfigError("target sample rate must be positive");
  if (w.sample_rate <= 0) throw ConfigError("source sample rate must be positive");
  if (target_rate == w.sample_rate) return w;

  const std::int64_t g = std::gcd(target_rate, w.sample_rate);
  const std::int64_t up = target_rate / g;
  const std::int64_t down = w.sample_rate / g;
  // Cutoff relative to the input Nyquist.
  const double cut = std::min(1.0, static_cast<double>(up) / static_cast<double>(down));
  const double support = kHalfZeroCrossings / cut;  // input samples per side
  const int taps_half = static_cast<int>(std::ceil(support));
  const int taps = 2 * taps_half;

  const auto n_in = static_cast<std::int64_t>(w.samples.size());
  const std::int64_t n_out = (n_in * up + down - 1) / down;

  auto build_phase = [&](std::int64_t phase, std::vector<double>& h) {
    const double frac = static_cast<double>(phase) / static_cast<double>(up);
    h.resize(taps);
    double sum = 0.0;
    for (int j = 0; j < taps; ++j) {
      const double tau = (j - taps_half + 1) - frac;
      h[j] = cut * sinc(cut * tau) * kaiser(tau / support, kKaiserBeta);
      sum += h[j];
    }
    for (double& v : h) v /= sum;
  };

  const bool tabulate = up <= 4096;
  std::vector<std::vector<double>> table;
  if (tabulate) {
    table.resize(static_cast<std::size_t>(up));
    for (std::int64_t p = 0; p < up; ++p) build_phase(p, table[static_cast<std::size_t>(p)]);
  }

  Waveform out;
  out.sample_rate = target_rate;
  out.samples.resize(static_cast<std::size_t>(n_out));
  std::vector<double> scratch;
  for (std::int64_t n = 0; n < n_out; ++n) {
    const std::int64_t base = (n * down) / up;
    const std::int64_t phase = (n * down) % up;
    const std::vector<double>* h = nullptr;
    if (tabulate) {
      h = &table[static_cast<std::size_t>(phase)];
    } else {
      build_phase(phase, scratch);
      h = &scratch;
    }
    double acc = 0.0;
    for (int j = 0; j < taps; ++j) {
      const std::int64_t idx = base + j - taps_half + 1;
      if (idx >= 0 && idx < n_in) acc += (*h)[j] * w.samples[static_cast<std::size_t>(idx)];
    }
    out.samples[static_cast<std::size_t>(n)] = acc;
  }
  return out;
}

}  // namespace whisperconv
