// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "whisperconv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <numeric>

#include "whisperconv/errors.hpp"
#include "whisperconv/fft.hpp"

namespace whisperconv {
namespace {

const double kMcdScale = 10.0 / std::numbers::ln10 * std::numbers::sqrt2;

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

double mcd(const Matrix& a, const Matrix& b, const std::vector<std::pair<int, int>>& pairs) {
  if (a.cols() != b.cols()) throw DimensionError("mcd inputs have different orders");
  if (pairs.empty()) throw EmptyInputError("mcd needs at least one paired frame");
  const Eigen::Index d = a.cols() - 1;
  double total = 0.0;
  for (const auto& [i, j] : pairs) {
    if (i < 0 || j < 0 || i >= a.rows() || j >= b.rows()) throw DimensionError("mcd pair out of range");
    total += (a.row(i).tail(d) - b.row(j).tail(d)).norm();
  }
  return kMcdScale * total / static_cast<double>(pairs.size());
}

double mcd(const Cepstrogram& a, const Cepstrogram& b) {
  if (a.num_frames() != b.num_frames()) {
    throw DimensionError("mcd without a path needs equal frame counts");
  }
  std::vector<std::pair<int, int>> pairs(static_cast<std::size_t>(a.num_frames()));
  for (int t = 0; t < a.num_frames(); ++t) pairs[static_cast<std::size_t>(t)] = {t, t};
  return mcd(a.frames, b.frames, pairs);
}

double mcd(const Cepstrogram& a, const Cepstrogram& b, const AlignmentPath& path) {
  return mcd(a.frames, b.frames, path.pairs);
}

double voicing_score(const Waveform& w) {
  if (w.sample_rate <= 0) throw ConfigError("sample rate must be positive");
  const auto n = w.samples.size();
  if (static_cast<double>(n) < 0.1 * w.sample_rate) {
    throw EmptyInputError("voicing_score needs at least 100 ms of audio");
  }
  const auto frame = static_cast<std::size_t>(std::lround(0.040 * w.sample_rate));
  const std::size_t hop = frame / 2;
  const auto min_lag = static_cast<std::size_t>(std::lround(0.0025 * w.sample_rate));
  const auto max_lag = std::min(static_cast<std::size_t>(std::lround(w.sample_rate / 60.0)), frame - 1);

  struct FrameStat {
    double energy;
    double peak;
  };
  std::vector<FrameStat> stats;
  for (std::size_t start = 0; start + frame <= n; start += hop) {
    const double* x = w.samples.data() + start;
    double energy = 0.0;
    for (std::size_t i = 0; i < frame; ++i) energy += x[i] * x[i];
    double peak = 0.0;
    if (energy > 0.0) {
      for (std::size_t lag = min_lag; lag <= max_lag; ++lag) {
        double num = 0.0, e0 = 0.0, e1 = 0.0;
        for (std::size_t i = 0; i + lag < frame; ++i) {
          num += x[i] * x[i + lag];
          e0 += x[i] * x[i];
          e1 += x[i + lag] * x[i + lag];
        }
        if (e0 > 0.0 && e1 > 0.0) peak = std::max(peak, num / std::sqrt(e0 * e1));
      }
    }
    stats.push_back({energy, peak});
  }
  std::stable_sort(stats.begin(), stats.end(),
                   [](const FrameStat& a, const FrameStat& b) { return a.energy > b.energy; });
  const std::size_t keep = (stats.size() + 1) / 2;
  double sum = 0.0;
  for (std::size_t i = 0; i < keep; ++i) sum += stats[i].peak;
  return std::clamp(sum / static_cast<double>(keep), 0.0, 1.0);
}

double spectral_tilt(const LogSpectrum& s) {
  const auto bins = s.bins.size();
  if (bins < 2) throw DimensionError("spectral_tilt needs at least two bins");
  const double df = static_cast<double>(s.sample_rate) / (2.0 * static_cast<double>(bins - 1));
  const double db = 20.0 / std::numbers::ln10;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t count = 0;
  for (Eigen::Index k = 1; k < s.bins.size(); ++k) {
    const double f = k * df;
    if (f < 100.0 || f > 8000.0) continue;
    const double x = std::log2(f);
    const double y = db * s.bins[k];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2) throw DimensionError("spectral_tilt band 100 Hz - 8 kHz holds fewer than two bins");
  const double nn = static_cast<double>(count);
  return (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
}

Vector long_term_power_spectrum(const Waveform& w, const AnalysisConfig& cfg) {
  cfg.validate();
  if (w.sample_rate != cfg.sample_rate) throw ConfigError("waveform rate does not match analysis rate");
  const int frames = frame_count(w.samples.size(), cfg.hop);
  Vector acc = Vector::Zero(cfg.bins());
  if (frames == 0) return acc;
  const Vector window = hann_window(cfg.frame_len);
  RealFft fft(cfg.fft_size);
  std::vector<double> buf(static_cast<std::size_t>(cfg.frame_len));
  std::vector<std::complex<double>> spec(static_cast<std::size_t>(cfg.bins()));
  const auto n = static_cast<std::int64_t>(w.samples.size());
  for (int t = 0; t < frames; ++t) {
    const std::int64_t start = static_cast<std::int64_t>(t) * cfg.hop - cfg.frame_len / 2;
    for (int j = 0; j < cfg.frame_len; ++j) {
      const std::int64_t idx = start + j;
      buf[j] = (idx >= 0 && idx < n) ? w.samples[static_cast<std::size_t>(idx)] * window[j] : 0.0;
    }
    fft.forward(buf, spec);
    for (int k = 0; k < cfg.bins(); ++k) acc[k] += std::norm(spec[k]);
  }
  return acc / frames;
}

std::vector<std::pair<double, double>> third_octave_bands(const Vector& power, int sample_rate,
                                                          double lo_hz, double hi_hz) {
  const auto bins = power.size();
  if (bins < 2) throw DimensionError("power spectrum needs at least two bins");
  const double df = static_cast<double>(sample_rate) / (2.0 * static_cast<double>(bins - 1));
  std::vector<std::pair<double, double>> out;
  for (int k = -30; k <= 30; ++k) {
    const double center = 1000.0 * std::pow(2.0, k / 3.0);
    if (center < lo_hz || center > hi_hz) continue;
    const double lo = center * std::pow(2.0, -1.0 / 6.0);
    const double hi = center * std::pow(2.0, 1.0 / 6.0);
    double sum = 0.0;
    for (Eigen::Index b = 0; b < power.size(); ++b) {
      const double f = b * df;
      if (f >= lo && f < hi) sum += power[b];
    }
    out.emplace_back(center, sum);
  }
  return out;
}

double max_band_deviation_db(const Vector& power_a, const Vector& power_b, int sample_rate,
                             double lo_hz, double hi_hz) {
  if (power_a.size() != power_b.size()) throw DimensionError("power spectra differ in size");
  const auto a = third_octave_bands(power_a, sample_rate, lo_hz, hi_hz);
  const auto b = third_octave_bands(power_b, sample_rate, lo_hz, hi_hz);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].second <= 0.0 && b[i].second <= 0.0) continue;
    const double ratio = std::max(a[i].second, 1e-300) / std::max(b[i].second, 1e-300);
    worst = std::max(worst, std::abs(10.0 * std::log10(ratio)));
  }
  return worst;
}

std::vector<std::pair<std::string, SystemSummary>> EvalReport::aggregate() const {
  std::vector<std::pair<std::string, SystemSummary>> out;
  std::vector<std::vector<const EvalRow*>> groups;
  for (const auto& r : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& p) { return p.first == r.system; });
    if (it == out.end()) {
      out.emplace_back(r.system, SystemSummary{});
      groups.emplace_back();
      it = out.end() - 1;
    }
    groups[static_cast<std::size_t>(it - out.begin())].push_back(&r);
  }
  auto moments = [](const std::vector<const EvalRow*>& g, auto field, double& mean, double& sd) {
    mean = 0.0;
    for (const auto* r : g) mean += (*r).*field;
    mean /= static_cast<double>(g.size());
    double ss = 0.0;
    for (const auto* r : g) ss += ((*r).*field - mean) * ((*r).*field - mean);
    sd = g.size() > 1 ? std::sqrt(ss / static_cast<double>(g.size() - 1)) : 0.0;
  };
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& s = out[i].second;
    s.count = groups[i].size();
    moments(groups[i], &EvalRow::mcd_db, s.mcd_mean, s.mcd_std);
    moments(groups[i], &EvalRow::voicing, s.voicing_mean, s.voicing_std);
    moments(groups[i], &EvalRow::tilt_db_per_octave, s.tilt_mean, s.tilt_std);
  }
  return out;
}

void EvalReport::write_csv(std::ostream& out) const {
  out << "utterance,system,mcd_db,voicing,tilt_db_per_octave\n";
  for (const auto& r : rows) {
    out << r.utterance << ',' << r.system << ',' << fmt(r.mcd_db, 6) << ',' << fmt(r.voicing, 6) << ','
        << fmt(r.tilt_db_per_octave, 6) << '\n';
  }
}

void EvalReport::write_markdown(std::ostream& out) const {
  const auto agg = aggregate();
  out << "| metric |";
  for (const auto& [name, s] : agg) out << ' ' << name << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < agg.size(); ++i) out << "---|";
  out << '\n';
  auto line = [&](const char* label, double SystemSummary::*mean, double SystemSummary::*sd) {
    out << "| " << label << " |";
    for (const auto& [name, s] : agg) out << ' ' << fmt(s.*mean) << " ± " << fmt(s.*sd) << " |";
    out << '\n';
  };
  line("MCD (dB)", &SystemSummary::mcd_mean, &SystemSummary::mcd_std);
  line("voicing", &SystemSummary::voicing_mean, &SystemSummary::voicing_std);
  line("tilt (dB/oct)", &SystemSummary::tilt_mean, &SystemSummary::tilt_std);
  out << "| utterances |";
  for (const auto& [name, s] : agg) out << ' ' << s.count << " |";
  out << '\n';
}

}  // namespace whisperconv
