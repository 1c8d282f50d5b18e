// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "whisperconv/alignment.hpp"
#include "whisperconv/audio_io.hpp"
#include "whisperconv/cli.hpp"
#include "whisperconv/dsp_recipe.hpp"
#include "whisperconv/errors.hpp"
#include "whisperconv/metrics.hpp"
#include "whisperconv/pipeline.hpp"
#include "whisperconv/spectral.hpp"
#include "whisperconv/vocoder.hpp"

namespace py = pybind11;
using namespace whisperconv;

namespace {

Waveform wave(std::vector<double> samples, int sample_rate) { return Waveform{std::move(samples), sample_rate}; }

// Brings audio to the analysis rate, as the CLI does for files.
Waveform at_rate(std::vector<double> samples, int sample_rate, const AnalysisConfig& cfg) {
  Waveform w = wave(std::move(samples), sample_rate);
  return w.sample_rate == cfg.sample_rate ? w : resample(w, cfg.sample_rate);
}

PipelineConfig pipeline_config(const std::string& config_json, std::uint64_t seed) {
  PipelineConfig cfg;
  if (!config_json.empty()) apply_config_json(config_json, cfg);
  cfg.seed = seed;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Normal-to-whispered speech conversion";

  auto base = py::register_exception<Error>(m, "WhisperconvError", PyExc_RuntimeError);
  py::register_exception<DecodeError>(m, "DecodeError", base.ptr());
  py::register_exception<UnsupportedFormatError>(m, "UnsupportedFormatError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<EmptyInputError>(m, "EmptyInputError", base.ptr());
  auto training = py::register_exception<TrainingError>(m, "TrainingError", base.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", training.ptr());
  py::register_exception<ManifestError>(m, "ManifestError", base.ptr());
  py::register_exception<SelectionError>(m, "SelectionError", base.ptr());
  py::register_exception<ModelError>(m, "ModelError", base.ptr());

  py::class_<AnalysisConfig>(m, "AnalysisConfig")
      .def(py::init<>())
      .def_readwrite("sample_rate", &AnalysisConfig::sample_rate)
      .def_readwrite("frame_len", &AnalysisConfig::frame_len)
      .def_readwrite("hop", &AnalysisConfig::hop)
      .def_readwrite("fft_size", &AnalysisConfig::fft_size)
      .def_readwrite("order", &AnalysisConfig::order)
      .def_readwrite("warp_alpha", &AnalysisConfig::warp_alpha)
      .def("validate", &AnalysisConfig::validate)
      .def("__repr__", [](const AnalysisConfig& c) {
        return "AnalysisConfig(sample_rate=" + std::to_string(c.sample_rate) + ", frame_len=" +
               std::to_string(c.frame_len) + ", hop=" + std::to_string(c.hop) + ", fft_size=" +
               std::to_string(c.fft_size) + ", order=" + std::to_string(c.order) +
               ", warp_alpha=" + std::to_string(c.warp_alpha) + ")";
      });

  m.def(
      "read_wav",
      [](const std::filesystem::path& p) {
        Waveform w = read_wav(p);
        return py::make_tuple(w.samples, w.sample_rate);
      },
      py::arg("path"), "Returns (samples, sample_rate); samples are mono floats in [-1, 1].");
  m.def(
      "write_wav", [](const std::filesystem::path& p, std::vector<double> s, int sr) { write_wav(wave(std::move(s), sr), p); },
      py::arg("path"), py::arg("samples"), py::arg("sample_rate"));
  m.def(
      "resample", [](std::vector<double> s, int sr, int target) { return resample(wave(std::move(s), sr), target).samples; },
      py::arg("samples"), py::arg("sample_rate"), py::arg("target_rate"));

  m.def(
      "analyze",
      [](std::vector<double> s, int sr, const AnalysisConfig& cfg) { return analyze(at_rate(std::move(s), sr, cfg), cfg).frames; },
      py::arg("samples"), py::arg("sample_rate"), py::arg("config") = AnalysisConfig{},
      "Mel-cepstral frames, shape (frames, order).");
  m.def(
      "synthesize",
      [](const Matrix& frames, const AnalysisConfig& cfg, std::uint64_t seed, double gain) {
        return synthesize(Cepstrogram{frames, cfg}, SynthesisConfig{seed, gain}).samples;
      },
      py::arg("frames"), py::arg("config") = AnalysisConfig{}, py::arg("seed") = 0, py::arg("gain") = 1.0,
      "Noise-excited waveform at the analysis sample rate.");
  m.def(
      "copy_synthesis",
      [](std::vector<double> s, int sr, const AnalysisConfig& cfg, std::uint64_t seed) {
        return copy_synthesis(at_rate(std::move(s), sr, cfg), cfg, SynthesisConfig{seed, 1.0}).samples;
      },
      py::arg("samples"), py::arg("sample_rate"), py::arg("config") = AnalysisConfig{}, py::arg("seed") = 0);
  m.def(
      "dsp_convert",
      [](std::vector<double> s, int sr, const std::string& config_json, std::uint64_t seed) {
        const PipelineConfig cfg = pipeline_config(config_json, seed);
        SynthesisConfig syn = cfg.synthesis;
        syn.seed = seed;
        return dsp_convert(at_rate(std::move(s), sr, cfg.analysis), cfg.analysis, syn, cfg.recipe).samples;
      },
      py::arg("samples"), py::arg("sample_rate"), py::arg("config_json") = "", py::arg("seed") = 0,
      "Rule-based conversion; returns samples at the analysis rate.");

  m.def(
      "dtw",
      [](const Matrix& src, const Matrix& tgt) {
        const AlignmentPath p = dtw(src, tgt);
        return py::make_tuple(p.pairs, p.total_cost);
      },
      py::arg("source"), py::arg("target"), "Returns (path pairs, total cost); c0 is ignored.");
  m.def(
      "mcd", [](const Matrix& a, const Matrix& b) { return mcd(Cepstrogram{a, {}}, Cepstrogram{b, {}}); },
      py::arg("a"), py::arg("b"), "Frame-by-frame mel-cepstral distortion in dB.");
  m.def(
      "mcd_path", [](const Matrix& a, const Matrix& b, const std::vector<std::pair<int, int>>& pairs) { return mcd(a, b, pairs); },
      py::arg("a"), py::arg("b"), py::arg("pairs"));
  m.def(
      "voicing_score", [](std::vector<double> s, int sr) { return voicing_score(wave(std::move(s), sr)); },
      py::arg("samples"), py::arg("sample_rate"));

  m.def(
      "load_model_info",
      [](const std::filesystem::path& p) {
        const VcModel model = load_model(p);
        return py::dict(py::arg("kind") = std::holds_alternative<GmmModel>(model) ? "gmm" : "dnn",
                        py::arg("trained_on") = model_trained_on(model),
                        py::arg("order") = model_config(model).order);
      },
      py::arg("path"));
  m.def(
      "convert",
      [](const std::filesystem::path& model_path, std::vector<double> s, int sr, const std::string& config_json,
         std::uint64_t seed) {
        PipelineConfig cfg = pipeline_config(config_json, seed);
        const VcModel model = load_model(model_path);
        cfg.analysis = model_config(model);
        cfg.synthesis.seed = seed;
        py::gil_scoped_release release;
        return convert_waveform(model, at_rate(std::move(s), sr, cfg.analysis), cfg).samples;
      },
      py::arg("model_path"), py::arg("samples"), py::arg("sample_rate"), py::arg("config_json") = "",
      py::arg("seed") = 0, "Converts normal speech with a trained GMM or DNN model file.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        py::gil_scoped_release release;
        return run(args);
      },
      py::arg("args"), "Runs a whisperconv command line; returns the exit code.");
  m.def("version_text", &version_text);
  m.attr("__version__") = WHISPERCONV_VERSION;
}
