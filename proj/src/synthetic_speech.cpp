// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "whisperconv/synthetic_speech.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "whisperconv/errors.hpp"

namespace whisperconv {

namespace {

constexpr double kPi = std::numbers::pi;

struct Vowel {
  double f1, f2, f3;
};

// Rough adult male formant targets.
constexpr std::array<Vowel, 8> kVowels{{
    {730, 1090, 2440},  // a
    {270, 2290, 3010},  // i
    {300, 870, 2240},   // u
    {530, 1840, 2480},  // e
    {570, 840, 2410},   // o
    {660, 1720, 2410},  // ae
    {440, 1020, 2240},  // schwa-ish
    {390, 1990, 2550},  // I
}};

struct Resonator {
  double b1 = 0, b2 = 0, a0 = 0, y1 = 0, y2 = 0;

  void set(double f, double bw, int sr) {
    const double r = std::exp(-kPi * bw / sr);
    b1 = 2.0 * r * std::cos(2.0 * kPi * f / sr);
    b2 = -r * r;
    a0 = 1.0 - b1 - b2;  // unit gain at DC
  }
  double operator()(double x) {
    const double y = a0 * x + b1 * y1 + b2 * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

struct Phone {
  Vowel v;
  double seconds;
};

struct Track {
  std::vector<double> f1, f2, f3;
  std::vector<double> envelope;  // amplitude contour, 0 in silences
};

// Per-sample formant tracks with 30 ms cosine transitions between phones.
Track render_track(const std::vector<Phone>& phones, double lead, double tail, double f1_offset,
                   double scale, int sr) {
  std::size_t n = static_cast<std::size_t>((lead + tail) * sr);
  for (const auto& p : phones) n += static_cast<std::size_t>(p.seconds * sr);
  Track t;
  t.f1.assign(n, 0.0);
  t.f2.assign(n, 0.0);
  t.f3.assign(n, 0.0);
  t.envelope.assign(n, 0.0);
  const auto lead_n = static_cast<std::size_t>(lead * sr);
  std::size_t at = lead_n;
  std::vector<std::pair<std::size_t, Vowel>> anchors;
  for (const auto& p : phones) {
    const auto len = static_cast<std::size_t>(p.seconds * sr);
    anchors.emplace_back(at + len / 2, p.v);
    at += len;
  }
  const std::size_t voiced_end = at;
  for (std::size_t i = 0; i < n; ++i) {
    // Piecewise-cosine interpolation between phone centers.
    Vowel v = anchors.front().second;
    if (i >= anchors.back().first) {
      v = anchors.back().second;
    } else if (i > anchors.front().first) {
      std::size_t k = 0;
      while (anchors[k + 1].first <= i) ++k;
      const double a = static_cast<double>(i - anchors[k].first) /
                       static_cast<double>(anchors[k + 1].first - anchors[k].first);
      const double w = 0.5 - 0.5 * std::cos(kPi * a);
      const Vowel& x = anchors[k].second;
      const Vowel& y = anchors[k + 1].second;
      v = {x.f1 + w * (y.f1 - x.f1), x.f2 + w * (y.f2 - x.f2), x.f3 + w * (y.f3 - x.f3)};
    }
    t.f1[i] = v.f1 * scale + f1_offset;
    t.f2[i] = v.f2 * scale;
    t.f3[i] = v.f3 * scale;
    if (i >= lead_n && i < voiced_end) {
      const double ramp = 0.02 * sr;
      const double up = std::min(1.0, static_cast<double>(i - lead_n) / ramp);
      const double down = std::min(1.0, static_cast<double>(voiced_end - i) / ramp);
      t.envelope[i] = std::min(up, down);
    }
  }
  return t;
}

// F1-F3 follow the track; fixed higher poles at roughly uniform-tube spacing
// keep the average envelope from collapsing above F5.
std::vector<double> filter_through_tract(const std::vector<double>& excitation, const Track& t,
                                         double bw_scale, double scale, int sr) {
  std::vector<std::pair<double, double>> fixed;  // (Hz, bandwidth)
  for (double f = 3500.0; f * scale < 0.45 * sr; f += 1000.0) {
    fixed.emplace_back(f * scale, (200.0 + 0.05 * (f - 3500.0)) * bw_scale);
  }
  std::vector<Resonator> res(3 + fixed.size());
  for (std::size_t k = 0; k < fixed.size(); ++k) res[3 + k].set(fixed[k].first, fixed[k].second, sr);
  std::vector<double> out(excitation.size());
  for (std::size_t i = 0; i < excitation.size(); ++i) {
    if (i % 32 == 0) {
      res[0].set(t.f1[i], 80.0 * bw_scale, sr);
      res[1].set(t.f2[i], 100.0 * bw_scale, sr);
      res[2].set(t.f3[i], 140.0 * bw_scale, sr);
    }
    double x = excitation[i];
    for (auto& r : res) x = r(x);
    out[i] = x;
  }
  return out;
}

void scale_to_peak(std::vector<double>& x, double peak) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  if (m > 0.0) {
    for (double& v : x) v *= peak / m;
  }
}

}  // namespace

Waveform sine_wave(double freq_hz, double seconds, int sample_rate, double amplitude) {
  if (sample_rate <= 0 || !(seconds >= 0.0)) throw ConfigError("invalid sine parameters");
  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.resize(static_cast<std::size_t>(std::llround(seconds * sample_rate)));
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    w.samples[i] = amplitude * std::sin(2.0 * kPi * freq_hz * static_cast<double>(i) / sample_rate);
  }
  return w;
}

Waveform white_noise(double seconds, int sample_rate, double amplitude, std::uint64_t seed) {
  if (sample_rate <= 0 || !(seconds >= 0.0)) throw ConfigError("invalid noise parameters");
  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.resize(static_cast<std::size_t>(std::llround(seconds * sample_rate)));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  for (double& s : w.samples) s = std::clamp(amplitude * g(rng), -1.0, 1.0);
  return w;
}

std::vector<SyntheticSpeaker> synthetic_speakers(const SyntheticCorpusOptions& o) {
  if (o.male_speakers < 0 || o.female_speakers < 0 || o.male_speakers + o.female_speakers == 0) {
    throw ConfigError("synthetic corpus needs at least one speaker");
  }
  std::mt19937_64 rng(o.seed ^ 0x5eed5eedULL);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<SyntheticSpeaker> out;
  for (int i = 0; i < o.male_speakers; ++i) {
    out.push_back({"M" + std::to_string(101 + i), Gender::kMale, 100.0 + 30.0 * u(rng), 0.95 + 0.1 * u(rng)});
  }
  for (int i = 0; i < o.female_speakers; ++i) {
    out.push_back({"F" + std::to_string(101 + i), Gender::kFemale, 190.0 + 40.0 * u(rng), 1.12 + 0.1 * u(rng)});
  }
  return out;
}

std::vector<SyntheticUtterance> generate_parallel_corpus(const SyntheticCorpusOptions& o) {
  if (o.utterances_per_speaker < 1 || o.phones_min < 1 || o.phones_max < o.phones_min) {
    throw ConfigError("invalid synthetic corpus sizes");
  }
  if (o.sample_rate < 16000) throw ConfigError("synthetic corpus needs a sample rate of at least 16 kHz");
  const int sr = o.sample_rate;
  std::vector<SyntheticUtterance> out;
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  for (const auto& spk : synthetic_speakers(o)) {
    for (int k = 0; k < o.utterances_per_speaker; ++k) {
      const int phones = o.phones_min + static_cast<int>(rng() % static_cast<std::uint64_t>(o.phones_max - o.phones_min + 1));
      std::vector<Phone> normal_ph, whisper_ph;
      for (int p = 0; p < phones; ++p) {
        const Vowel v = kVowels[rng() % kVowels.size()];
        const double dur = 0.09 + 0.11 * u(rng);
        normal_ph.push_back({v, dur});
        // Whispered phones are usually a little longer.
        whisper_ph.push_back({v, dur * (0.9 + 0.35 * u(rng))});
      }

      SyntheticUtterance utt;
      utt.id = spk.name + "_" + (k < 9 ? "00" : k < 99 ? "0" : "") + std::to_string(k + 1);
      utt.speaker = spk;

      // Normal: Rosenberg glottal flow derivative with jitter-free falling F0.
      {
        const Track t = render_track(normal_ph, 0.15 + 0.1 * u(rng), 0.15 + 0.1 * u(rng), 0.0,
                                     spk.formant_scale, sr);
        std::vector<double> exc(t.envelope.size(), 0.0);
        double phase = 0.0;
        const double n = static_cast<double>(exc.size());
        constexpr double kOpen = 0.4, kClose = 0.16;  // fractions of the period
        for (std::size_t i = 0; i < exc.size(); ++i) {
          const double f0 = spk.f0_hz * (1.08 - 0.16 * static_cast<double>(i) / n);
          phase += f0 / sr;
          if (phase >= 1.0) phase -= 1.0;
          double d = 0.0;
          if (phase < kOpen) {
            d = 0.5 * kPi / kOpen * std::sin(kPi * phase / kOpen);
          } else if (phase < kOpen + kClose) {
            d = -0.5 * kPi / kClose * std::sin(0.5 * kPi * (phase - kOpen) / kClose);
          }
          exc[i] = t.envelope[i] * d;
        }
        auto y = filter_through_tract(exc, t, 1.0, spk.formant_scale, sr);
        scale_to_peak(y, 0.6);
        for (double& s : y) s += 1e-4 * g(rng);
        utt.normal = Waveform{std::move(y), sr};
      }
      // Whisper: aspiration noise, F1 raised, broader resonances.
      {
        const Track t = render_track(whisper_ph, 0.1 + 0.2 * u(rng), 0.1 + 0.2 * u(rng), 120.0,
                                     spk.formant_scale, sr);
        std::vector<double> exc(t.envelope.size());
        double prev = 0.0;
        for (std::size_t i = 0; i < exc.size(); ++i) {
          const double e = g(rng);
          exc[i] = t.envelope[i] * (e - 0.9 * prev);  // radiation-like emphasis
          prev = e;
        }
        auto y = filter_through_tract(exc, t, 3.0, spk.formant_scale, sr);
        // Parallel turbulence above ~2 kHz, following the same amplitude contour.
        double ry = 0.0;
        for (double v : y) ry += v * v;
        std::vector<double> hf(y.size());
        Resonator lowpart;
        lowpart.set(0.0, 4000.0, sr);
        double hf_energy = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
          const double e = t.envelope[i] * g(rng);
          hf[i] = e - lowpart(e);
          hf_energy += hf[i] * hf[i];
        }
        const double hf_gain = hf_energy > 0.0 ? std::sqrt(0.35 * ry / hf_energy) : 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += hf_gain * hf[i];
        scale_to_peak(y, 0.25);
        for (double& s : y) s += 1e-4 * g(rng);
        utt.whisper = Waveform{std::move(y), sr};
      }
      out.push_back(std::move(utt));
    }
  }
  return out;
}

Manifest write_synthetic_corpus(const SyntheticCorpusOptions& o, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  Manifest m;
  m.dataset = "synthetic";
  m.version = "1";
  for (const auto& utt : generate_parallel_corpus(o)) {
    const fs::path base = dir / utt.speaker.name;
    fs::create_directories(base / "normal");
    fs::create_directories(base / "whisper");
    Utterance e{utt.id, utt.speaker.name, utt.speaker.gender, "synthetic", m.dataset,
                base / "normal" / (utt.id + ".wav"), base / "whisper" / (utt.id + ".wav")};
    write_wav(utt.normal, e.normal_path);
    write_wav(utt.whisper, e.whisper_path);
    m.utterances.push_back(std::move(e));
  }
  save_manifest(m, dir / "manifest.json");
  return m;
}

}  // namespace whisperconv
