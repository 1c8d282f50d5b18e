// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "whisperconv/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "whisperconv/errors.hpp"
#include "whisperconv/synthetic_speech.hpp"

#ifndef WHISPERCONV_VERSION
#define WHISPERCONV_VERSION "0.0.0"
#endif

namespace whisperconv {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError("config section '" + where + "' must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) throw ConfigError("unknown config key '" + where + "." + k + "'");
  }
}

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void apply_config_json(const std::string& json_text, PipelineConfig& cfg) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    check_keys(j, "", {"seed", "jobs", "analysis", "synthesis", "dsp", "alignment", "gmm", "dnn", "split"});
    take(j, "seed", cfg.seed);
    take(j, "jobs", cfg.jobs);
    if (j.contains("analysis")) {
      const auto& a = j["analysis"];
      check_keys(a, "analysis", {"sample_rate", "frame_len", "hop", "fft_size", "order", "warp_alpha"});
      take(a, "sample_rate", cfg.analysis.sample_rate);
      take(a, "frame_len", cfg.analysis.frame_len);
      take(a, "hop", cfg.analysis.hop);
      take(a, "fft_size", cfg.analysis.fft_size);
      take(a, "order", cfg.analysis.order);
      take(a, "warp_alpha", cfg.analysis.warp_alpha);
    }
    if (j.contains("synthesis")) {
      const auto& s = j["synthesis"];
      check_keys(s, "synthesis", {"gain"});
      take(s, "gain", cfg.synthesis.gain);
    }
    if (j.contains("dsp")) {
      const auto& d = j["dsp"];
      check_keys(d, "dsp", {"f0_ref", "broaden_hz", "anchors", "lf"});
      take(d, "f0_ref", cfg.recipe.f0_ref);
      take(d, "broaden_hz", cfg.recipe.broaden_hz);
      if (d.contains("anchors")) {
        cfg.recipe.anchors.points.clear();
        for (const auto& p : d["anchors"]) {
          cfg.recipe.anchors.points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
        }
      }
      if (d.contains("lf")) {
        const auto& lf = d["lf"];
        check_keys(lf, "dsp.lf", {"ra", "rk", "rg"});
        take(lf, "ra", cfg.recipe.lf.ra);
        take(lf, "rk", cfg.recipe.lf.rk);
        take(lf, "rg", cfg.recipe.lf.rg);
      }
    }
    if (j.contains("alignment")) {
      const auto& a = j["alignment"];
      check_keys(a, "alignment", {"rounds", "interim_epochs", "trim_margin"});
      take(a, "rounds", cfg.align_rounds);
      take(a, "interim_epochs", cfg.interim_epochs);
      take(a, "trim_margin", cfg.trim_margin);
    }
    if (j.contains("gmm")) {
      const auto& g = j["gmm"];
      check_keys(g, "gmm", {"mixtures", "tol", "max_iter", "kmeans_restarts", "kmeans_max_iter",
                            "covariance_floor", "global_variance", "gv_weight"});
      take(g, "mixtures", cfg.gmm.mixtures);
      take(g, "tol", cfg.gmm.tol);
      take(g, "max_iter", cfg.gmm.max_iter);
      take(g, "kmeans_restarts", cfg.gmm.kmeans_restarts);
      take(g, "kmeans_max_iter", cfg.gmm.kmeans_max_iter);
      take(g, "covariance_floor", cfg.gmm.covariance_floor);
      take(g, "global_variance", cfg.gmm_convert.global_variance);
      take(g, "gv_weight", cfg.gmm_convert.gv_weight);
    }
    if (j.contains("dnn")) {
      const auto& d = j["dnn"];
      check_keys(d, "dnn", {"hidden_sizes", "learning_rate", "batch_size", "l2_lambda", "epochs", "adam_beta1",
                            "adam_beta2", "adam_eps"});
      take(d, "hidden_sizes", cfg.dnn.hidden_sizes);
      take(d, "learning_rate", cfg.dnn.learning_rate);
      take(d, "batch_size", cfg.dnn.batch_size);
      take(d, "l2_lambda", cfg.dnn.l2_lambda);
      take(d, "epochs", cfg.dnn.epochs);
      take(d, "adam_beta1", cfg.dnn.adam_beta1);
      take(d, "adam_beta2", cfg.dnn.adam_beta2);
      take(d, "adam_eps", cfg.dnn.adam_eps);
    }
    if (j.contains("split")) {
      const auto& s = j["split"];
      check_keys(s, "split", {"ratios"});
      if (s.contains("ratios")) {
        const auto r = s["ratios"].get<std::vector<double>>();
        if (r.size() != 3) throw ConfigError("split.ratios needs three values");
        cfg.split_ratios = {r[0], r[1], r[2]};
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
}

std::string version_text() {
  std::ostringstream s;
  s << "whisperconv " << WHISPERCONV_VERSION << '\n'
    << "MCEP cepstrogram format " << kCepstrogramFormatVersion << '\n'
    << "ALGN aligned-pair format " << kAlignedPairFormatVersion << '\n'
    << "GMMV model format " << kGmmFormatVersion << '\n'
    << "DNNV model format " << kDnnFormatVersion << '\n';
  return s.str();
}

namespace {

struct Options {
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string config_path;

  std::string in, out, in2;
  double gain = 1.0;
  double f0_ref = 150.0;

  std::string model_kind, mode = "all", target, dataset, manifest, model_path, split_csv;
  std::vector<std::string> systems;
  std::string partition = "test", csv_path, markdown_path, output_dir;
  int mixtures = 0, epochs = 0, rounds = 0;

  int male = 2, female = 2, per_speaker = 10;
};

void check_config(const PipelineConfig& cfg) {
  cfg.analysis.validate();
  cfg.synthesis.validate();
  cfg.dnn.validate();
  if (!cfg.recipe.anchors.points.empty()) cfg.recipe.anchors.validate();
  if (cfg.jobs < 1) throw ConfigError("--jobs must be at least 1");
  if (cfg.align_rounds < 1) throw ConfigError("alignment rounds must be at least 1");
  if (cfg.interim_epochs < 1) throw ConfigError("interim epochs must be at least 1");
  if (cfg.gmm.mixtures < 1) throw ConfigError("GMM mixtures must be at least 1");
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

int dispatch(CLI::App& app, const Options& o, PipelineConfig cfg) {
  auto used = [&](const char* name) { return app.get_subcommand(name)->parsed(); };
  auto flag_set = [&](const char* sub, const char* opt) { return app.get_subcommand(sub)->count(opt) > 0; };
  SynthesisConfig syn = cfg.synthesis;
  syn.seed = cfg.seed;

  if (used("analyze")) {
    write_cepstrogram(analyze(load_for_analysis(o.in, cfg.analysis), cfg.analysis), o.out);
  } else if (used("synthesize")) {
    if (flag_set("synthesize", "--gain")) syn.gain = o.gain;
    const Cepstrogram c = read_cepstrogram(o.in, cfg.analysis);
    write_wav(synthesize(c, syn), o.out);
  } else if (used("oracle")) {
    write_wav(copy_synthesis(load_for_analysis(o.in, cfg.analysis), cfg.analysis, syn), o.out);
  } else if (used("dsp-convert")) {
    if (flag_set("dsp-convert", "--f0-ref")) cfg.recipe.f0_ref = o.f0_ref;
    write_wav(dsp_convert(load_for_analysis(o.in, cfg.analysis), cfg.analysis, syn, cfg.recipe), o.out);
  } else if (used("align")) {
    const auto utt = analyze_parallel("pair", load_for_analysis(o.in, cfg.analysis),
                                      load_for_analysis(o.in2, cfg.analysis), cfg);
    const AlignmentPath path = dtw(utt.source, utt.target);
    std::ostringstream csv;
    write_path_csv(path, utt.source.frames, utt.target.frames, csv, utt.source_offset, utt.target_offset);
    write_text(o.out, csv.str());
  } else if (used("split")) {
    const Manifest m = load_manifest(o.manifest);
    std::ostringstream csv;
    split(m, cfg.split_ratios, cfg.seed).write_csv(csv);
    write_text(o.out, csv.str());
  } else if (used("train")) {
    if (flag_set("train", "--mixtures")) cfg.gmm.mixtures = o.mixtures;
    if (flag_set("train", "--epochs")) cfg.dnn.epochs = o.epochs;
    if (flag_set("train", "--rounds")) cfg.align_rounds = o.rounds;
    check_config(cfg);
    const ModelKind kind = parse_model_kind(o.model_kind);
    SelectionQuery q;
    q.mode = parse_selection_mode(o.mode);
    q.target_speaker = o.target;
    if (!o.dataset.empty()) q.dataset = o.dataset;
    if ((q.mode == SelectionMode::kSD || q.mode == SelectionMode::kExcl) && q.target_speaker.empty()) {
      throw ConfigError("--mode " + o.mode + " requires --target");
    }
    const Manifest m = load_manifest(o.manifest);
    const SplitAssignment s = split(m, cfg.split_ratios, cfg.seed);
    if (!o.split_csv.empty()) {
      std::ostringstream csv;
      s.write_csv(csv);
      write_text(o.split_csv, csv.str());
    }
    const VcModel model = train_regime(m, s, q, kind, cfg);
    if (fs::path(o.out).has_parent_path()) fs::create_directories(fs::path(o.out).parent_path());
    save_model(model, o.out);
    std::cout << "trained on " << model_trained_on(model) << '\n';
  } else if (used("convert")) {
    const VcModel model = load_model(o.model_path);
    if (!(model_config(model) == cfg.analysis)) {
      throw ModelError("model " + o.model_path + " was trained with a different analysis config");
    }
    cfg.synthesis = syn;
    write_wav(convert_waveform(model, load_for_analysis(o.in, cfg.analysis), cfg), o.out);
  } else if (used("evaluate")) {
    const Manifest m = load_manifest(o.manifest);
    const SplitAssignment s = split(m, cfg.split_ratios, cfg.seed);
    SelectionQuery q;
    q.mode = SelectionMode::kAll;
    q.partition = parse_partition(o.partition);
    if (!o.target.empty()) {
      q.mode = SelectionMode::kSD;
      q.target_speaker = o.target;
    }
    if (!o.dataset.empty()) q.dataset = o.dataset;
    std::vector<SystemSpec> systems;
    std::set<std::string> names;
    for (const auto& text : o.systems) {
      systems.push_back(parse_system_spec(text));
      if (!names.insert(systems.back().name).second) {
        throw ConfigError("system name '" + systems.back().name + "' given twice");
      }
    }
    std::optional<fs::path> out_dir;
    if (!o.output_dir.empty()) out_dir = o.output_dir;
    const EvalReport report = evaluate_systems(select_utterances(m, s, q), systems, cfg, out_dir);
    std::ostringstream csv, md;
    report.write_csv(csv);
    report.write_markdown(md);
    write_text(o.csv_path, csv.str());
    if (!o.markdown_path.empty()) write_text(o.markdown_path, md.str());
    std::cout << md.str();
  } else if (used("demo-corpus")) {
    SyntheticCorpusOptions so;
    so.male_speakers = o.male;
    so.female_speakers = o.female;
    so.utterances_per_speaker = o.per_speaker;
    so.sample_rate = cfg.analysis.sample_rate;
    so.seed = cfg.seed;
    const Manifest m = write_synthetic_corpus(so, o.out);
    std::cout << "wrote " << m.utterances.size() << " utterance pairs to " << o.out << '\n';
  } else {
    throw ConfigError("a subcommand is required");
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Normal-to-whispered speech conversion toolkit", "whisperconv"};
  app.require_subcommand(0, 1);
  Options o;
  bool show_version = false;
  app.add_flag("--version", show_version, "Print tool and file format versions");
  app.add_option("--seed", o.seed, "Seed for every random choice");
  app.add_option("--jobs", o.jobs, "Worker threads for per-utterance work")->check(CLI::PositiveNumber);
  app.add_option("--config", o.config_path, "JSON config file; flags override it")->check(CLI::ExistingFile);
  app.fallthrough();

  auto* a = app.add_subcommand("analyze", "wav -> mel-cepstrogram file");
  a->add_option("input", o.in)->required()->check(CLI::ExistingFile);
  a->add_option("output", o.out)->required();

  auto* s = app.add_subcommand("synthesize", "mel-cepstrogram file -> wav (noise-excited)");
  s->add_option("input", o.in)->required()->check(CLI::ExistingFile);
  s->add_option("output", o.out)->required();
  s->add_option("--gain", o.gain, "Linear output gain");

  auto* orc = app.add_subcommand("oracle", "Copy synthesis of a (whispered) recording");
  orc->add_option("input", o.in)->required()->check(CLI::ExistingFile);
  orc->add_option("output", o.out)->required();

  auto* dsp = app.add_subcommand("dsp-convert", "Rule-based normal-to-whisper conversion");
  dsp->add_option("input", o.in)->required()->check(CLI::ExistingFile);
  dsp->add_option("output", o.out)->required();
  dsp->add_option("--f0-ref", o.f0_ref, "Reference F0 of the glottal template in Hz");

  auto* al = app.add_subcommand("align", "DTW path between a normal and a whispered wav");
  al->add_option("normal", o.in)->required()->check(CLI::ExistingFile);
  al->add_option("whisper", o.in2)->required()->check(CLI::ExistingFile);
  al->add_option("output", o.out, "CSV path file")->required();

  auto* sp = app.add_subcommand("split", "Write the train/validation/test assignment as CSV");
  sp->add_option("--manifest", o.manifest)->required()->check(CLI::ExistingFile);
  sp->add_option("output", o.out)->required();

  auto* tr = app.add_subcommand("train", "Train a conversion model for one data regime");
  tr->add_option("--model", o.model_kind, "gmm or dnn")->required();
  tr->add_option("--mode", o.mode, "sd, all, excl, male or female");
  tr->add_option("--target", o.target, "Evaluated speaker (sd and excl)");
  tr->add_option("--dataset", o.dataset, "Restrict to one dataset of the manifest");
  tr->add_option("--manifest", o.manifest)->required()->check(CLI::ExistingFile);
  tr->add_option("--output,-o", o.out, "Model file")->required();
  tr->add_option("--split-csv", o.split_csv, "Also write the split assignment here");
  tr->add_option("--mixtures", o.mixtures, "GMM mixture count")->check(CLI::PositiveNumber);
  tr->add_option("--epochs", o.epochs, "DNN epochs")->check(CLI::PositiveNumber);
  tr->add_option("--rounds", o.rounds, "Alignment refinement rounds")->check(CLI::PositiveNumber);

  auto* cv = app.add_subcommand("convert", "Convert a normal-speech wav with a trained model");
  cv->add_option("--model", o.model_path)->required()->check(CLI::ExistingFile);
  cv->add_option("input", o.in)->required()->check(CLI::ExistingFile);
  cv->add_option("output", o.out)->required();

  auto* ev = app.add_subcommand("evaluate", "Objective scores of systems on one partition");
  ev->add_option("--manifest", o.manifest)->required()->check(CLI::ExistingFile);
  ev->add_option("--systems", o.systems, "Rec, Oracle, DSP, NAME=model or NAME=wav-dir")->required();
  ev->add_option("--csv", o.csv_path, "Per-utterance CSV")->required();
  ev->add_option("--markdown", o.markdown_path, "Aggregate Markdown table");
  ev->add_option("--partition", o.partition, "train, validation or test");
  ev->add_option("--target", o.target, "Only this speaker");
  ev->add_option("--dataset", o.dataset, "Only this dataset");
  ev->add_option("--output-dir", o.output_dir, "Also write each system's wavs here");

  auto* demo = app.add_subcommand("demo-corpus", "Generate a synthetic parallel corpus with a manifest");
  demo->add_option("output", o.out, "Directory")->required();
  demo->add_option("--male", o.male)->check(CLI::NonNegativeNumber);
  demo->add_option("--female", o.female)->check(CLI::NonNegativeNumber);
  demo->add_option("--per-speaker", o.per_speaker)->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    if (e.get_exit_code() != 0) std::cerr << app.help();
    return e.get_exit_code() == 0 ? 0 : 1;
  }
  if (show_version) {
    std::cout << version_text();
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 1;
  }

  try {
    PipelineConfig cfg;
    if (!o.config_path.empty()) {
      std::ifstream in(o.config_path);
      std::stringstream ss;
      ss << in.rdbuf();
      apply_config_json(ss.str(), cfg);
    }
    if (app.count("--seed")) cfg.seed = o.seed;
    if (app.count("--jobs")) cfg.jobs = o.jobs;
    check_config(cfg);
    return dispatch(app, o, cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace whisperconv
