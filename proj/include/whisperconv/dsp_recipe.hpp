// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <utility>
#include <vector>

#include "whisperconv/audio_io.hpp"
#include "whisperconv/spectral.hpp"
#include "whisperconv/vocoder.hpp"

namespace whisperconv {

/// Liljencrants-Fant shape parameters (modal voice by default).
struct LfParameters {
  double ra = 0.01;
  double rk = 0.34;
  double rg = 1.0;
};

/// Log-magnitude glottal pulse spectrum, peak-normalized so its maximum is 0.
struct GlottalTemplate {
  Vector bins;
  int sample_rate = 24000;
};

/// Piecewise-linear frequency map given by (input Hz, output Hz) breakpoints.
/// Strictly increasing in both coordinates, from (0, 0) to (nyquist, nyquist).
struct WarpAnchors {
  std::vector<std::pair<double, double>> points;

  /// +100 Hz across the 400-900 Hz first-formant band, identity from 1400 Hz.
  static WarpAnchors first_formant_shift(double nyquist);
  static WarpAnchors identity(double nyquist);

  void validate() const;
  double map(double hz) const;
  double inverse(double hz) const;
};

struct DspRecipeConfig {
  double f0_ref = 150.0;
  LfParameters lf;
  /// Empty means first_formant_shift at the analysis Nyquist.
  WarpAnchors anchors;
  double broaden_hz = 400.0;
};

/// One period of the LF glottal flow derivative at `f0`, sampled at
/// `sample_rate`, normalized to Ee = 1 and zero net area.
std::vector<double> lf_flow_derivative(double f0, int sample_rate, const LfParameters& lf = {});

/// Step 1 template: LF pulse spectrum, smoothed by the Step 3 triangular
/// kernel. Bins below the spectral peak are held at the peak value so the
/// subtraction does not boost the region under the glottal formant.
GlottalTemplate glottal_template(const AnalysisConfig& cfg, double f0_ref = 150.0,
                                 const LfParameters& lf = {}, double smoothing_hz = 400.0);

/// Step 1: bins_in - template.
LogSpectrum remove_glottal_shaping(const LogSpectrum& s, const GlottalTemplate& t);
/// Step 2: out(f) = in(m^-1(f)), linearly interpolated between bins.
LogSpectrum warp_formant1(const LogSpectrum& s, const WarpAnchors& anchors);
/// Step 3: unit-area triangular moving average of total width `width_hz`,
/// edges replicated.
LogSpectrum broaden_formants(const LogSpectrum& s, double width_hz = 400.0);

/// Per-frame Steps 1-3 in the cepstral domain; c0 of every frame is kept.
Cepstrogram dsp_convert_features(const Cepstrogram& c, const DspRecipeConfig& recipe = {});

/// analyze -> Steps 1-3 -> noise-excited synthesis.
Waveform dsp_convert(const Waveform& w, const AnalysisConfig& analysis,
                     const SynthesisConfig& synthesis, const DspRecipeConfig& recipe = {});

}  // namespace whisperconv
