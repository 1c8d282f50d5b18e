// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "whisperconv/alignment.hpp"
#include "whisperconv/audio_io.hpp"
#include "whisperconv/spectral.hpp"

namespace whisperconv {

/// Mel-cepstral distortion in dB, averaged over paired frames, c0 excluded:
///   (10 / ln 10) * sqrt(2 * sum_{d>=1} (a_d - b_d)^2).
/// Without a path the sequences are paired frame by frame and must have the
/// same length.
double mcd(const Cepstrogram& a, const Cepstrogram& b);
double mcd(const Cepstrogram& a, const Cepstrogram& b, const AlignmentPath& path);
double mcd(const Matrix& a, const Matrix& b, const std::vector<std::pair<int, int>>& pairs);

/// Phonation indicator in [0, 1]: mean, over the louder half of 40 ms frames
/// (50% overlap), of the peak normalized autocorrelation for lags of
/// 2.5-16.7 ms. Requires at least 100 ms of audio.
double voicing_score(const Waveform& w);

/// Least-squares slope, in dB per octave, of the log spectrum against
/// log2(frequency) over 100 Hz - 8 kHz.
double spectral_tilt(const LogSpectrum& s);

/// Mean |X|^2 over centered Hann frames (the analysis framing of `cfg`).
Vector long_term_power_spectrum(const Waveform& w, const AnalysisConfig& cfg);

/// Power summed into 1/3-octave bands centered at 1000 * 2^(k/3) Hz, for
/// centers within [lo_hz, hi_hz]. Returns (center, power) pairs.
std::vector<std::pair<double, double>> third_octave_bands(const Vector& power, int sample_rate,
                                                          double lo_hz = 100.0,
                                                          double hi_hz = 10000.0);

/// Largest |10 log10(a_band / b_band)| over the shared 1/3-octave bands.
double max_band_deviation_db(const Vector& power_a, const Vector& power_b, int sample_rate,
                             double lo_hz = 100.0, double hi_hz = 10000.0);

struct EvalRow {
  std::string utterance;
  std::string system;
  double mcd_db = 0.0;
  double voicing = 0.0;
  double tilt_db_per_octave = 0.0;
};

struct SystemSummary {
  std::size_t count = 0;
  double mcd_mean = 0.0, mcd_std = 0.0;
  double voicing_mean = 0.0, voicing_std = 0.0;
  double tilt_mean = 0.0, tilt_std = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> rows;

  /// Per-system means and sample standard deviations, in first-seen order.
  std::vector<std::pair<std::string, SystemSummary>> aggregate() const;
  void write_csv(std::ostream& out) const;
  /// Metrics as rows, systems as columns, "mean ± std" cells.
  void write_markdown(std::ostream& out) const;
};

}  // namespace whisperconv
