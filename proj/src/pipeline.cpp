// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "whisperconv/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <memory>
#include <type_traits>

#include "whisperconv/errors.hpp"
#include "whisperconv/parallel.hpp"

namespace whisperconv {

namespace fs = std::filesystem;

std::uint64_t utterance_seed(std::uint64_t seed, const std::string& id) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : id) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  // splitmix64 finalizer over the combination.
  std::uint64_t z = h ^ (seed + 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Waveform load_for_analysis(const fs::path& path, const AnalysisConfig& cfg) {
  Waveform w = read_wav(path);
  if (w.sample_rate != cfg.sample_rate) w = resample(w, cfg.sample_rate);
  return w;
}

ParallelUtterance analyze_parallel(const std::string& id, const Waveform& normal, const Waveform& whisper,
                                   const PipelineConfig& cfg) {
  auto src = trim_silence(analyze(normal, cfg.analysis), cfg.trim_margin);
  auto tgt = trim_silence(analyze(whisper, cfg.analysis), cfg.trim_margin);
  return ParallelUtterance{id, std::move(src.trimmed), std::move(tgt.trimmed), src.offset, tgt.offset};
}

std::vector<ParallelUtterance> analyze_parallel(const std::vector<Utterance>& utts, const PipelineConfig& cfg) {
  std::vector<ParallelUtterance> out(utts.size());
  parallel_for(utts.size(), cfg.jobs, [&](std::size_t i) {
    const auto& u = utts[i];
    out[i] = analyze_parallel(u.id, load_for_analysis(u.normal_path, cfg.analysis),
                              load_for_analysis(u.whisper_path, cfg.analysis), cfg);
  });
  return out;
}

InterimTrainer interim_dnn_trainer(const PipelineConfig& cfg) {
  DnnHyperparams hp = cfg.dnn;
  hp.epochs = cfg.interim_epochs;
  hp.seed = cfg.seed;
  const AnalysisConfig analysis = cfg.analysis;
  return [hp, analysis](const AlignedPairSet& pairs) -> FrameConverter {
    auto model = std::make_shared<DnnModel>(train_dnn(pairs, hp, AlignedPairSet{}));
    model->config = analysis;
    return [model](const Cepstrogram& c) { return convert_dnn(*model, c); };
  };
}

AlignedPairSet align_corpus(const std::vector<ParallelUtterance>& corpus, const PipelineConfig& cfg) {
  return iterative_align(corpus, cfg.align_rounds, interim_dnn_trainer(cfg), cfg.jobs);
}

ModelKind parse_model_kind(const std::string& s) {
  std::string l = s;
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
  if (l == "gmm") return ModelKind::kGmm;
  if (l == "dnn") return ModelKind::kDnn;
  throw ConfigError("unknown model type '" + s + "' (expected gmm or dnn)");
}

GmmModel train_gmm_model(const AlignedPairSet& pairs, const PipelineConfig& cfg, const std::string& trained_on) {
  GmmTrainOptions opt = cfg.gmm;
  opt.seed = cfg.seed;
  opt.jobs = cfg.jobs;
  GmmModel m = train_gmm(build_joint_vectors(pairs), opt);
  m.config = cfg.analysis;
  m.trained_on = trained_on;
  return m;
}

DnnModel train_dnn_model(const AlignedPairSet& pairs, const AlignedPairSet& val, const PipelineConfig& cfg,
                         const std::string& trained_on, DnnTrainReport* report) {
  DnnHyperparams hp = cfg.dnn;
  hp.seed = cfg.seed;
  DnnModel m = train_dnn(pairs, hp, val, report);
  m.config = cfg.analysis;
  m.trained_on = trained_on;
  return m;
}

VcModel train_regime(const Manifest& m, const SplitAssignment& split, const SelectionQuery& query, ModelKind kind,
                     const PipelineConfig& cfg) {
  const auto train_utts = select_utterances(m, split, query);
  const std::string trained_on = describe_selection(query, train_utts);
  const AlignedPairSet pairs = align_corpus(analyze_parallel(train_utts, cfg), cfg);
  if (kind == ModelKind::kGmm) return train_gmm_model(pairs, cfg, trained_on);

  // Validation pairs come from the same regime on the validation partition;
  // a regime with no validation utterances trains without early selection.
  AlignedPairSet val;
  SelectionQuery vq = query;
  vq.partition = Partition::kValidation;
  try {
    const auto val_utts = select_utterances(m, split, vq);
    val = align_corpus(analyze_parallel(val_utts, cfg), cfg);
  } catch (const SelectionError&) {
  }
  return train_dnn_model(pairs, val, cfg, trained_on);
}

void save_model(const VcModel& model, const fs::path& path) {
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GmmModel>) {
          save_gmm(m, path);
        } else {
          save_dnn(m, path);
        }
      },
      model);
}

VcModel load_model(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  const std::string tag(magic, static_cast<std::size_t>(in.gcount()));
  if (tag == "GMMV") return load_gmm(path);
  if (tag == "DNNV") return load_dnn(path);
  throw DecodeError(path.string() + " is not a GMM or DNN model file");
}

const AnalysisConfig& model_config(const VcModel& model) {
  return std::visit([](const auto& m) -> const AnalysisConfig& { return m.config; }, model);
}

const std::string& model_trained_on(const VcModel& model) {
  return std::visit([](const auto& m) -> const std::string& { return m.trained_on; }, model);
}

Cepstrogram convert_features(const VcModel& model, const Cepstrogram& src, const PipelineConfig& cfg) {
  if (!(model_config(model) == src.config)) {
    throw ModelError("model analysis config does not match the input pipeline");
  }
  if (const auto* g = std::get_if<GmmModel>(&model)) return convert_gmm(*g, src, cfg.gmm_convert);
  return convert_dnn(std::get<DnnModel>(model), src);
}

Waveform convert_waveform(const VcModel& model, const Waveform& normal, const PipelineConfig& cfg) {
  if (!(model_config(model) == cfg.analysis)) {
    throw ModelError("model analysis config does not match the input pipeline");
  }
  return synthesize(convert_features(model, analyze(normal, cfg.analysis), cfg), cfg.synthesis);
}

SystemSpec parse_system_spec(const std::string& text) {
  std::string l = text;
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
  if (l == "rec") return {"Rec", SystemSpec::Kind::kRecording, {}};
  if (l == "oracle") return {"Oracle", SystemSpec::Kind::kOracle, {}};
  if (l == "dsp") return {"DSP", SystemSpec::Kind::kDsp, {}};
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
    throw ConfigError("system '" + text + "' must be Rec, Oracle, DSP or NAME=PATH");
  }
  SystemSpec s{text.substr(0, eq), SystemSpec::Kind::kModel, fs::path(text.substr(eq + 1))};
  if (fs::is_directory(s.path)) {
    s.kind = SystemSpec::Kind::kDirectory;
  } else if (!fs::exists(s.path)) {
    throw IoError("system '" + s.name + "': " + s.path.string() + " does not exist");
  }
  return s;
}

Waveform system_output(const SystemSpec& spec, const std::optional<VcModel>& model, const Utterance& utt,
                       const PipelineConfig& cfg) {
  SynthesisConfig syn = cfg.synthesis;
  syn.seed = utterance_seed(cfg.seed, utt.id);
  switch (spec.kind) {
    case SystemSpec::Kind::kRecording:
      return load_for_analysis(utt.whisper_path, cfg.analysis);
    case SystemSpec::Kind::kOracle:
      return copy_synthesis(load_for_analysis(utt.whisper_path, cfg.analysis), cfg.analysis, syn);
    case SystemSpec::Kind::kDsp:
      return dsp_convert(load_for_analysis(utt.normal_path, cfg.analysis), cfg.analysis, syn, cfg.recipe);
    case SystemSpec::Kind::kModel: {
      if (!model) throw ConfigError("system '" + spec.name + "' has no loaded model");
      PipelineConfig local = cfg;
      local.synthesis = syn;
      return convert_waveform(*model, load_for_analysis(utt.normal_path, cfg.analysis), local);
    }
    case SystemSpec::Kind::kDirectory:
      return load_for_analysis(spec.path / (utt.id + ".wav"), cfg.analysis);
  }
  throw ConfigError("unhandled system kind");
}

EvalRow score_output(const std::string& utterance, const std::string& system, const Waveform& output,
                     const Cepstrogram& reference, const PipelineConfig& cfg) {
  EvalRow row;
  row.utterance = utterance;
  row.system = system;
  const Cepstrogram out = trim_silence(analyze(output, cfg.analysis), cfg.trim_margin).trimmed;
  row.mcd_db = mcd(out, reference, dtw(out, reference));
  row.voicing = voicing_score(output);
  const Vector mean_c = out.frames.colwise().mean().transpose();
  row.tilt_db_per_octave = spectral_tilt(cepstrum_to_envelope(mean_c, cfg.analysis));
  return row;
}

EvalReport evaluate_systems(const std::vector<Utterance>& utts, const std::vector<SystemSpec>& systems,
                            const PipelineConfig& cfg, const std::optional<fs::path>& output_dir) {
  if (utts.empty()) throw SelectionError("no utterances to evaluate");
  if (systems.empty()) throw ConfigError("no systems to evaluate");
  std::vector<std::optional<VcModel>> models;
  for (const auto& s : systems) {
    if (s.kind == SystemSpec::Kind::kModel) {
      models.emplace_back(load_model(s.path));
      if (!(model_config(*models.back()) == cfg.analysis)) {
        throw ModelError("model of system '" + s.name + "' uses a different analysis config");
      }
    } else {
      models.emplace_back();
    }
  }
  if (output_dir) {
    for (const auto& s : systems) fs::create_directories(*output_dir / s.name);
  }
  std::vector<std::vector<EvalRow>> rows(utts.size());
  parallel_for(utts.size(), cfg.jobs, [&](std::size_t i) {
    const auto& u = utts[i];
    const Cepstrogram ref =
        trim_silence(analyze(load_for_analysis(u.whisper_path, cfg.analysis), cfg.analysis), cfg.trim_margin)
            .trimmed;
    for (std::size_t k = 0; k < systems.size(); ++k) {
      const Waveform w = system_output(systems[k], models[k], u, cfg);
      if (output_dir) write_wav(w, *output_dir / systems[k].name / (u.id + ".wav"));
      rows[i].push_back(score_output(u.id, systems[k].name, w, ref, cfg));
    }
  });
  EvalReport report;
  for (auto& r : rows) report.rows.insert(report.rows.end(), r.begin(), r.end());
  return report;
}

}  // namespace whisperconv
