// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "whisperconv/alignment.hpp"
#include "whisperconv/audio_io.hpp"
#include "whisperconv/corpus.hpp"
#include "whisperconv/dsp_recipe.hpp"
#include "whisperconv/metrics.hpp"
#include "whisperconv/spectral.hpp"
#include "whisperconv/vc_dnn.hpp"
#include "whisperconv/vc_gmm.hpp"
#include "whisperconv/vocoder.hpp"

namespace whisperconv {

struct PipelineConfig {
  AnalysisConfig analysis;
  SynthesisConfig synthesis;
  DspRecipeConfig recipe;
  GmmTrainOptions gmm;
  GmmConvertOptions gmm_convert;
  DnnHyperparams dnn;
  int align_rounds = 3;
  int interim_epochs = 5;
  int trim_margin = 5;
  std::array<double, 3> split_ratios{0.8, 0.1, 0.1};
  std::uint64_t seed = 0;
  int jobs = 1;
};

/// Stable per-utterance seed so results do not depend on processing order.
std::uint64_t utterance_seed(std::uint64_t seed, const std::string& id);

/// Reads a wav and brings it to the analysis sample rate.
Waveform load_for_analysis(const std::filesystem::path& path, const AnalysisConfig& cfg);

/// Analyzes and silence-trims both sides of each utterance.
std::vector<ParallelUtterance> analyze_parallel(const std::vector<Utterance>& utts, const PipelineConfig& cfg);
ParallelUtterance analyze_parallel(const std::string& id, const Waveform& normal, const Waveform& whisper,
                                   const PipelineConfig& cfg);

/// Interim model for iterative alignment: the DNN trainer with few epochs.
InterimTrainer interim_dnn_trainer(const PipelineConfig& cfg);

AlignedPairSet align_corpus(const std::vector<ParallelUtterance>& corpus, const PipelineConfig& cfg);

enum class ModelKind { kGmm, kDnn };
ModelKind parse_model_kind(const std::string& s);

using VcModel = std::variant<GmmModel, DnnModel>;

GmmModel train_gmm_model(const AlignedPairSet& pairs, const PipelineConfig& cfg, const std::string& trained_on);
DnnModel train_dnn_model(const AlignedPairSet& pairs, const AlignedPairSet& val, const PipelineConfig& cfg,
                         const std::string& trained_on, DnnTrainReport* report = nullptr);

/// Selection, analysis, alignment and training for one regime.
VcModel train_regime(const Manifest& m, const SplitAssignment& split, const SelectionQuery& query, ModelKind kind,
                     const PipelineConfig& cfg);

void save_model(const VcModel& model, const std::filesystem::path& path);
/// Dispatches on the file magic.
VcModel load_model(const std::filesystem::path& path);
const AnalysisConfig& model_config(const VcModel& model);
const std::string& model_trained_on(const VcModel& model);

Cepstrogram convert_features(const VcModel& model, const Cepstrogram& src, const PipelineConfig& cfg);
Waveform convert_waveform(const VcModel& model, const Waveform& normal, const PipelineConfig& cfg);

/// An evaluated system: "Rec", "Oracle", "DSP", NAME=<model file> or
/// NAME=<directory holding <utterance id>.wav>.
struct SystemSpec {
  enum class Kind { kRecording, kOracle, kDsp, kModel, kDirectory };
  std::string name;
  Kind kind = Kind::kRecording;
  std::filesystem::path path;
};
SystemSpec parse_system_spec(const std::string& text);

/// Output of a system for one utterance; reads/generates as needed.
Waveform system_output(const SystemSpec& spec, const std::optional<VcModel>& model, const Utterance& utt,
                       const PipelineConfig& cfg);

/// MCD to the whispered recording along a DTW path over trimmed frames, the
/// voicing score of the waveform, and the tilt of the mean envelope.
EvalRow score_output(const std::string& utterance, const std::string& system, const Waveform& output,
                     const Cepstrogram& reference, const PipelineConfig& cfg);

EvalReport evaluate_systems(const std::vector<Utterance>& utts, const std::vector<SystemSpec>& systems,
                            const PipelineConfig& cfg,
                            const std::optional<std::filesystem::path>& output_dir = std::nullopt);

}  // namespace whisperconv
