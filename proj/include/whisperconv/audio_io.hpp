// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <vector>

namespace whisperconv {

/// Mono audio at a known sample rate. Decoded samples lie in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 24000;

  double duration() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

/// Decodes a RIFF/WAVE file (PCM16 or IEEE float32, any channel count).
/// Multi-channel audio is averaged to mono. PCM16 is scaled by 1/32768.
Waveform read_wav(const std::filesystem::path& path);

/// Encodes as 16-bit PCM mono. Out-of-range samples are hard-clipped.
void write_wav(const Waveform& w, const std::filesystem::path& path);

/// Raw encoders, exposed for byte-level tests.
std::vector<unsigned char> encode_wav_pcm16(const Waveform& w);
Waveform decode_wav(const std::vector<unsigned char>& bytes);

/// Band-limited rational resampling with a Kaiser-windowed sinc kernel.
/// The cutoff sits at the lower of the two Nyquist frequencies.
Waveform resample(const Waveform& w, int target_rate);

}  // namespace whisperconv
