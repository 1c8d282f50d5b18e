// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "whisperconv/audio_io.hpp"
#include "whisperconv/corpus.hpp"

namespace whisperconv {

Waveform sine_wave(double freq_hz, double seconds, int sample_rate = 24000, double amplitude = 0.5);
Waveform white_noise(double seconds, int sample_rate = 24000, double amplitude = 0.1,
                     std::uint64_t seed = 0);

struct SyntheticSpeaker {
  std::string name;
  Gender gender = Gender::kFemale;
  double f0_hz = 200.0;
  double formant_scale = 1.0;  // vocal tract length factor
};

// Parallel normal/whispered utterances built from a formant synthesizer.
// Normal speech is a glottal pulse train through cascaded resonators;
// whisper uses noise excitation, a raised first formant, wider bandwidths,
// a lower level and its own phone timing.
struct SyntheticCorpusOptions {
  int male_speakers = 2;
  int female_speakers = 2;
  int utterances_per_speaker = 10;
  int phones_min = 6;
  int phones_max = 10;
  int sample_rate = 24000;
  std::uint64_t seed = 0;
};

struct SyntheticUtterance {
  std::string id;
  SyntheticSpeaker speaker;
  Waveform normal;
  Waveform whisper;
};

std::vector<SyntheticSpeaker> synthetic_speakers(const SyntheticCorpusOptions& options);
std::vector<SyntheticUtterance> generate_parallel_corpus(const SyntheticCorpusOptions& options);

/// Writes <dir>/<speaker>/{normal,whisper}/<id>.wav plus <dir>/manifest.json.
Manifest write_synthetic_corpus(const SyntheticCorpusOptions& options, const std::filesystem::path& dir);

}  // namespace whisperconv
