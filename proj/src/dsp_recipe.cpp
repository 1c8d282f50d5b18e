// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "whisperconv/dsp_recipe.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "whisperconv/errors.hpp"
#include "whisperconv/fft.hpp"

namespace whisperconv {

WarpAnchors WarpAnchors::first_formant_shift(double nyquist) {
  return WarpAnchors{{{0.0, 0.0},
                      {300.0, 350.0},
                      {400.0, 500.0},
                      {900.0, 1000.0},
                      {1400.0, 1400.0},
                      {nyquist, nyquist}}};
}

WarpAnchors WarpAnchors::identity(double nyquist) {
  return WarpAnchors{{{0.0, 0.0}, {nyquist, nyquist}}};
}

void WarpAnchors::validate() const {
  if (points.size() < 2) throw ConfigError("warp anchors need at least two points");
  if (points.front().first != 0.0 || points.front().second != 0.0) {
    throw ConfigError("first warp anchor must be (0, 0)");
  }
  if (points.back().first != points.back().second) {
    throw ConfigError("last warp anchor must map Nyquist to itself");
  }
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i].first > points[i - 1].first) || !(points[i].second > points[i - 1].second)) {
      throw ConfigError("warp anchors must be strictly increasing in both coordinates");
    }
  }
}

namespace {

double piecewise_linear(const std::vector<std::pair<double, double>>& pts, double x, bool forward) {
  auto in = [&](std::size_t i) { return forward ? pts[i].first : pts[i].second; };
  auto out = [&](std::size_t i) { return forward ? pts[i].second : pts[i].first; };
  if (x <= in(0)) return out(0) + (x - in(0));
  const std::size_t last = pts.size() - 1;
  if (x >= in(last)) return out(last) + (x - in(last));
  std::size_t i = 1;
  while (in(i) < x) ++i;
  const double t = (x - in(i - 1)) / (in(i) - in(i - 1));
  return out(i - 1) + t * (out(i) - out(i - 1));
}

// Unit-area triangular kernel of total width `width_hz` on a grid of `bin_hz`.
std::vector<double> triangular_kernel(double width_hz, double bin_hz) {
  const double half = width_hz / 2.0;
  const int reach = static_cast<int>(std::floor(half / bin_hz));
  std::vector<double> k(static_cast<std::size_t>(2 * reach + 1));
  double sum = 0.0;
  for (int j = -reach; j <= reach; ++j) {
    const double v = std::max(0.0, 1.0 - std::abs(j) * bin_hz / half);
    k[static_cast<std::size_t>(j + reach)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

Vector smooth_triangular(const Vector& x, double width_hz, double bin_hz) {
  const auto kernel = triangular_kernel(width_hz, bin_hz);
  const int reach = static_cast<int>(kernel.size() / 2);
  const auto n = static_cast<int>(x.size());
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = -reach; j <= reach; ++j) {
      const int idx = std::clamp(i + j, 0, n - 1);
      acc += kernel[static_cast<std::size_t>(j + reach)] * x[idx];
    }
    y[i] = acc;
  }
  return y;
}

double bin_spacing(const LogSpectrum& s) {
  if (s.bins.size() < 2) throw DimensionError("log spectrum needs at least two bins");
  return static_cast<double>(s.sample_rate) / (2.0 * static_cast<double>(s.bins.size() - 1));
}

// Solves eps * ta = 1 - exp(-eps * tb) for the return-phase time constant.
double return_phase_epsilon(double ta, double tb) {
  double eps = 1.0 / ta;
  for (int i = 0; i < 100; ++i) {
    const double e = std::exp(-eps * tb);
    const double f = eps * ta - 1.0 + e;
    const double df = ta - tb * e;
    const double next = eps - f / df;
    if (std::abs(next - eps) < 1e-14 * eps) return next;
    eps = next;
  }
  return eps;
}

}  // namespace

double WarpAnchors::map(double hz) const { return piecewise_linear(points, hz, true); }
double WarpAnchors::inverse(double hz) const { return piecewise_linear(points, hz, false); }

std::vector<double> lf_flow_derivative(double f0, int sample_rate, const LfParameters& lf) {
  if (!(f0 > 0.0) || sample_rate <= 0) throw ConfigError("f0 and sample rate must be positive");
  // Work with T0 = 1 and rescale time when sampling.
  const double tp = 1.0 / (2.0 * lf.rg);
  const double te = tp * (1.0 + lf.rk);
  const double ta = lf.ra;
  const double tb = 1.0 - te;
  if (!(te < 1.0) || !(ta > 0.0)) throw ConfigError("LF parameters give an invalid timing");
  const double wg = std::numbers::pi / tp;
  const double eps = return_phase_epsilon(ta, tb);
  const double ee = 1.0;

  const double return_area =
      -(ee / (eps * ta)) * ((1.0 - std::exp(-eps * tb)) / eps - tb * std::exp(-eps * tb));
  auto e0_of = [&](double alpha) { return -ee / (std::exp(alpha * te) * std::sin(wg * te)); };
  auto net_area = [&](double alpha) {
    const double integral =
        (std::exp(alpha * te) * (alpha * std::sin(wg * te) - wg * std::cos(wg * te)) + wg) /
        (alpha * alpha + wg * wg);
    return e0_of(alpha) * integral + return_area;
  };
  // Bracket the zero-area growth factor by scanning, then bisect.
  double lo = -50.0;
  double hi = lo;
  double f_lo = net_area(lo);
  for (double a = -50.0; a <= 200.0; a += 0.5) {
    const double f = net_area(a);
    if ((f < 0) != (f_lo < 0)) {
      hi = a;
      break;
    }
    lo = a;
    f_lo = f;
  }
  if (hi == lo) throw ConfigError("LF area balance has no solution for these parameters");
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if ((net_area(mid) < 0) == (f_lo < 0)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double alpha = 0.5 * (lo + hi);
  const double e0 = e0_of(alpha);

  const int n = std::max(2, static_cast<int>(std::lround(sample_rate / f0)));
  std::vector<double> pulse(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / n;
    pulse[static_cast<std::size_t>(i)] =
        t <= te ? e0 * std::exp(alpha * t) * std::sin(wg * t)
                : -(ee / (eps * ta)) * (std::exp(-eps * (t - te)) - std::exp(-eps * tb));
  }
  double mean = 0.0;
  for (double v : pulse) mean += v;
  mean /= n;
  for (double& v : pulse) v -= mean;
  return pulse;
}

GlottalTemplate glottal_template(const AnalysisConfig& cfg, double f0_ref, const LfParameters& lf,
                                 double smoothing_hz) {
  cfg.validate();
  if (f0_ref < 50.0 || f0_ref > 400.0) throw ConfigError("f0_ref must lie in [50, 400] Hz");
  // The closure of the LF pulse is nearly a step; sampling it at the output
  // rate aliases strongly and makes the template jump between adjacent F0s.
  // Oversampling and keeping the same bin spacing approximates the
  // continuous-time spectrum.
  constexpr int kOversample = 16;
  const auto pulse = lf_flow_derivative(f0_ref, cfg.sample_rate * kOversample, lf);
  RealFft fft(cfg.fft_size * kOversample);
  std::vector<std::complex<double>> spec(static_cast<std::size_t>(cfg.fft_size * kOversample / 2 + 1));
  fft.forward(pulse, spec);
  Vector logmag(cfg.bins());
  for (int k = 0; k < cfg.bins(); ++k) logmag[k] = std::log(std::max(std::abs(spec[k]), kMagnitudeFloor));
  Vector smooth = smooth_triangular(logmag, smoothing_hz, cfg.bin_hz());
  Eigen::Index peak = 0;
  const double top = smooth.maxCoeff(&peak);
  smooth.head(peak).setConstant(top);
  smooth.array() -= top;
  return GlottalTemplate{smooth, cfg.sample_rate};
}

LogSpectrum remove_glottal_shaping(const LogSpectrum& s, const GlottalTemplate& t) {
  if (s.bins.size() != t.bins.size()) {
    throw DimensionError("glottal template has " + std::to_string(t.bins.size()) +
                         " bins, spectrum has " + std::to_string(s.bins.size()));
  }
  return LogSpectrum{s.bins - t.bins, s.sample_rate};
}

LogSpectrum warp_formant1(const LogSpectrum& s, const WarpAnchors& anchors) {
  anchors.validate();
  const double df = bin_spacing(s);
  const auto n = static_cast<int>(s.bins.size());
  LogSpectrum out{Vector(n), s.sample_rate};
  for (int k = 0; k < n; ++k) {
    const double src = std::clamp(anchors.inverse(k * df) / df, 0.0, static_cast<double>(n - 1));
    const int i0 = std::min(static_cast<int>(std::floor(src)), n - 2);
    const double frac = src - i0;
    out.bins[k] = (1.0 - frac) * s.bins[i0] + frac * s.bins[i0 + 1];
  }
  return out;
}

LogSpectrum broaden_formants(const LogSpectrum& s, double width_hz) {
  if (!(width_hz > 0.0)) throw ConfigError("broadening width must be positive");
  return LogSpectrum{smooth_triangular(s.bins, width_hz, bin_spacing(s)), s.sample_rate};
}

Cepstrogram dsp_convert_features(const Cepstrogram& c, const DspRecipeConfig& recipe) {
  const AnalysisConfig& cfg = c.config;
  const GlottalTemplate tmpl = glottal_template(cfg, recipe.f0_ref, recipe.lf, recipe.broaden_hz);
  const WarpAnchors anchors = recipe.anchors.points.empty()
                                  ? WarpAnchors::first_formant_shift(cfg.sample_rate / 2.0)
                                  : recipe.anchors;
  anchors.validate();
  const CepstralTransform& xf = cepstral_transform(cfg);
  Cepstrogram out{Matrix(c.frames.rows(), c.frames.cols()), cfg};
  for (Eigen::Index t = 0; t < c.frames.rows(); ++t) {
    LogSpectrum env{xf.envelope(c.frames.row(t).transpose()), cfg.sample_rate};
    env = remove_glottal_shaping(env, tmpl);
    env = warp_formant1(env, anchors);
    env = broaden_formants(env, recipe.broaden_hz);
    Vector ceps = xf.cepstrum(env.bins);
    ceps[0] = c.frames(t, 0);
    out.frames.row(t) = ceps.transpose();
  }
  return out;
}

Waveform dsp_convert(const Waveform& w, const AnalysisConfig& analysis,
                     const SynthesisConfig& synthesis, const DspRecipeConfig& recipe) {
  return synthesize(dsp_convert_features(analyze(w, analysis), recipe), synthesis);
}

}  // namespace whisperconv
