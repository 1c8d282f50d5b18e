// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>

#include "whisperconv/audio_io.hpp"
#include "whisperconv/spectral.hpp"

namespace whisperconv {

struct SynthesisConfig {
  std::uint64_t seed = 0;
  double gain = 1.0;

  void validate() const;
};

/// Noise-excited resynthesis. Each frame is white Gaussian noise whose
/// spectrum is scaled by exp(envelope), windowed by a Hann window and
/// overlap-added at the analysis hop. Levels are calibrated so that
/// re-analysing the output reproduces the input cepstra on average.
/// Output length is T * hop samples.
Waveform synthesize(const Cepstrogram& c, const SynthesisConfig& cfg);

/// synthesize(analyze(w)): the vocoder's copy-synthesis ceiling.
Waveform copy_synthesis(const Waveform& w, const AnalysisConfig& analysis,
                        const SynthesisConfig& synthesis);

}  // namespace whisperconv
