// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "whisperconv/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <random>
#include <set>
#include <sstream>

#include "whisperconv/errors.hpp"

namespace whisperconv {

namespace fs = std::filesystem;

std::string to_string(Gender g) { return g == Gender::kMale ? "male" : "female"; }

std::string to_string(Partition p) {
  switch (p) {
    case Partition::kTrain: return "train";
    case Partition::kValidation: return "validation";
    case Partition::kTest: return "test";
  }
  return "?";
}

std::string to_string(SelectionMode m) {
  switch (m) {
    case SelectionMode::kSD: return "sd";
    case SelectionMode::kAll: return "all";
    case SelectionMode::kExcl: return "excl";
    case SelectionMode::kMale: return "male";
    case SelectionMode::kFemale: return "female";
  }
  return "?";
}

namespace {
std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}
}  // namespace

Gender parse_gender(const std::string& s) {
  const auto l = lower(s);
  if (l == "male" || l == "m") return Gender::kMale;
  if (l == "female" || l == "f") return Gender::kFemale;
  throw ManifestError("unknown gender '" + s + "' (expected male or female)");
}

Partition parse_partition(const std::string& s) {
  const auto l = lower(s);
  if (l == "train") return Partition::kTrain;
  if (l == "validation" || l == "val") return Partition::kValidation;
  if (l == "test") return Partition::kTest;
  throw ConfigError("unknown partition '" + s + "'");
}

SelectionMode parse_selection_mode(const std::string& s) {
  const auto l = lower(s);
  if (l == "sd") return SelectionMode::kSD;
  if (l == "all") return SelectionMode::kAll;
  if (l == "excl") return SelectionMode::kExcl;
  if (l == "male") return SelectionMode::kMale;
  if (l == "female") return SelectionMode::kFemale;
  throw ConfigError("unknown training mode '" + s + "' (expected sd, all, excl, male, female)");
}

std::vector<std::string> Manifest::speakers() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& u : utterances) {
    if (seen.insert(u.speaker).second) out.push_back(u.speaker);
  }
  return out;
}

const Utterance& Manifest::find(const std::string& id) const {
  for (const auto& u : utterances) {
    if (u.id == id) return u;
  }
  throw ManifestError("no utterance with id '" + id + "'");
}

Manifest parse_manifest(const std::string& json_text, const fs::path& base_dir, bool check_files) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ManifestError(std::string("manifest is not valid JSON: ") + e.what());
  }
  Manifest m;
  std::vector<std::string> missing;
  try {
    m.dataset = j.at("dataset").get<std::string>();
    m.version = j.value("version", std::string{});
    std::set<std::string> ids;
    for (const auto& e : j.at("utterances")) {
      Utterance u;
      u.id = e.at("id").get<std::string>();
      u.speaker = e.at("speaker").get<std::string>();
      u.gender = parse_gender(e.at("gender").get<std::string>());
      u.locale = e.value("locale", std::string{});
      u.dataset = e.value("dataset", m.dataset);
      u.normal_path = e.at("normal_path").get<std::string>();
      u.whisper_path = e.at("whisper_path").get<std::string>();
      if (u.normal_path.is_relative()) u.normal_path = base_dir / u.normal_path;
      if (u.whisper_path.is_relative()) u.whisper_path = base_dir / u.whisper_path;
      if (u.id.empty()) throw ManifestError("utterance with empty id");
      if (!ids.insert(u.id).second) throw ManifestError("duplicate utterance id '" + u.id + "'");
      if (check_files) {
        if (!fs::exists(u.normal_path)) missing.push_back(u.id + " (normal: " + u.normal_path.string() + ")");
        if (!fs::exists(u.whisper_path)) {
          missing.push_back(u.id + " (whisper: " + u.whisper_path.string() + ")");
        }
      }
      m.utterances.push_back(std::move(u));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ManifestError(std::string("malformed manifest: ") + e.what());
  }
  if (m.utterances.empty()) throw ManifestError("manifest lists no utterances");
  if (!missing.empty()) {
    std::string msg = "manifest references missing audio files:";
    for (const auto& s : missing) msg += "\n  " + s;
    throw ManifestError(msg);
  }
  return m;
}

Manifest load_manifest(const fs::path& path, bool check_files) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), path.parent_path(), check_files);
}

void save_manifest(const Manifest& m, const fs::path& path) {
  nlohmann::json j;
  j["dataset"] = m.dataset;
  if (!m.version.empty()) j["version"] = m.version;
  auto& arr = j["utterances"] = nlohmann::json::array();
  const fs::path base = path.parent_path();
  auto rel = [&](const fs::path& p) {
    if (base.empty()) return p.generic_string();
    auto r = p.lexically_relative(base);
    return (r.empty() ? p : r).generic_string();
  };
  for (const auto& u : m.utterances) {
    nlohmann::json e{{"id", u.id},           {"speaker", u.speaker},
                     {"gender", to_string(u.gender)}, {"locale", u.locale},
                     {"normal_path", rel(u.normal_path)}, {"whisper_path", rel(u.whisper_path)}};
    if (u.dataset != m.dataset) e["dataset"] = u.dataset;
    arr.push_back(std::move(e));
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << j.dump(2) << '\n';
}

Manifest scan_parallel_tree(const fs::path& root, const std::string& dataset,
                            const std::map<std::string, Gender>& genders) {
  if (!fs::is_directory(root)) throw IoError(root.string() + " is not a directory");
  Manifest m;
  m.dataset = dataset;
  std::vector<fs::path> speakers;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory()) speakers.push_back(e.path());
  }
  std::sort(speakers.begin(), speakers.end());
  for (const auto& dir : speakers) {
    fs::path normal, whisper;
    for (const auto& e : fs::directory_iterator(dir)) {
      const auto name = lower(e.path().filename().string());
      if (name == "normal") normal = e.path();
      if (name == "whisper") whisper = e.path();
    }
    if (normal.empty() || whisper.empty()) continue;
    const std::string spk = dir.filename().string();
    Gender g;
    if (auto it = genders.find(spk); it != genders.end()) {
      g = it->second;
    } else if (!spk.empty() && (spk[0] == 'M' || spk[0] == 'm')) {
      g = Gender::kMale;
    } else if (!spk.empty() && (spk[0] == 'F' || spk[0] == 'f')) {
      g = Gender::kFemale;
    } else {
      throw ManifestError("cannot infer gender of speaker '" + spk + "'");
    }
    std::vector<fs::path> wavs;
    for (const auto& e : fs::directory_iterator(normal)) {
      if (lower(e.path().extension().string()) == ".wav") wavs.push_back(e.path());
    }
    std::sort(wavs.begin(), wavs.end());
    for (const auto& n : wavs) {
      const fs::path w = whisper / n.filename();
      if (!fs::exists(w)) continue;
      m.utterances.push_back(
          {spk + "_" + n.stem().string(), spk, g, std::string{}, dataset, n, w});
    }
  }
  if (m.utterances.empty()) throw ManifestError("no parallel normal/whisper pairs under " + root.string());
  return m;
}

std::vector<std::string> SplitAssignment::ids_in(Partition p) const {
  std::vector<std::string> out;
  for (const auto& [id, part] : partition) {
    if (part == p) out.push_back(id);
  }
  return out;
}

void SplitAssignment::write_csv(std::ostream& out) const {
  out << "id,partition\n";
  for (const auto& [id, part] : partition) out << id << ',' << to_string(part) << '\n';
}

std::array<std::size_t, 3> split_counts(std::size_t n, const std::array<double, 3>& ratios) {
  double total = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0)) throw ConfigError("split ratios must be non-negative");
    total += r;
  }
  if (!(total > 0.0)) throw ConfigError("split ratios must not all be zero");
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> frac{};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = static_cast<double>(n) * ratios[i] / total;
    // Round first so that ratios like 0.8 * 10 land on 8, not 7.999...
    const double floored = std::floor(exact + 1e-9);
    counts[i] = static_cast<std::size_t>(floored);
    frac[i] = exact - floored;
    assigned += counts[i];
  }
  std::array<int, 3> idx{0, 1, 2};
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return frac[a] > frac[b]; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[static_cast<std::size_t>(idx[k % 3])];
  return counts;
}

SplitAssignment split(const Manifest& m, const std::array<double, 3>& ratios, std::uint64_t seed) {
  SplitAssignment out;
  out.seed = seed;
  std::mt19937_64 rng(seed);
  for (const auto& spk : m.speakers()) {
    std::vector<std::string> ids;
    for (const auto& u : m.utterances) {
      if (u.speaker == spk) ids.push_back(u.id);
    }
    if (ids.size() < 3) {
      throw ConfigError("speaker '" + spk + "' has " + std::to_string(ids.size()) +
                        " utterances; at least 3 are needed for a three-way split");
    }
    for (std::size_t i = ids.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng() % i);
      std::swap(ids[i - 1], ids[j]);
    }
    const auto counts = split_counts(ids.size(), ratios);
    std::size_t at = 0;
    const std::array<Partition, 3> parts{Partition::kTrain, Partition::kValidation, Partition::kTest};
    for (int p = 0; p < 3; ++p) {
      for (std::size_t k = 0; k < counts[static_cast<std::size_t>(p)]; ++k) {
        out.partition[ids[at++]] = parts[static_cast<std::size_t>(p)];
      }
    }
  }
  return out;
}

std::vector<Utterance> select_utterances(const Manifest& m, const SplitAssignment& s,
                                         const SelectionQuery& q) {
  const bool needs_target = q.mode == SelectionMode::kSD || q.mode == SelectionMode::kExcl;
  if (needs_target && q.target_speaker.empty()) {
    throw SelectionError("mode " + to_string(q.mode) + " needs a target speaker");
  }
  if (needs_target) {
    const auto spk = m.speakers();
    if (std::find(spk.begin(), spk.end(), q.target_speaker) == spk.end()) {
      throw SelectionError("target speaker '" + q.target_speaker + "' is not in the manifest");
    }
  }
  std::vector<Utterance> out;
  for (const auto& u : m.utterances) {
    auto it = s.partition.find(u.id);
    if (it == s.partition.end() || it->second != q.partition) continue;
    if (q.dataset && u.dataset != *q.dataset) continue;
    bool keep = false;
    switch (q.mode) {
      case SelectionMode::kSD: keep = u.speaker == q.target_speaker; break;
      case SelectionMode::kAll: keep = true; break;
      case SelectionMode::kExcl: keep = u.speaker != q.target_speaker; break;
      case SelectionMode::kMale: keep = u.gender == Gender::kMale; break;
      case SelectionMode::kFemale: keep = u.gender == Gender::kFemale; break;
    }
    if (keep) out.push_back(u);
  }
  if (out.empty()) {
    throw SelectionError("selection " + to_string(q.mode) + " on partition " + to_string(q.partition) +
                         " is empty");
  }
  return out;
}

std::vector<Utterance> select_training_set(const Manifest& m, const SplitAssignment& s, SelectionMode mode,
                                           const std::string& target_speaker,
                                           const std::optional<std::string>& dataset) {
  return select_utterances(m, s, SelectionQuery{mode, target_speaker, dataset, Partition::kTrain});
}

std::string describe_selection(const SelectionQuery& q, const std::vector<Utterance>& chosen) {
  nlohmann::json j;
  j["mode"] = to_string(q.mode);
  if (!q.target_speaker.empty()) j["target"] = q.target_speaker;
  if (q.dataset) j["dataset"] = *q.dataset;
  std::vector<std::string> speakers;
  for (const auto& u : chosen) {
    if (std::find(speakers.begin(), speakers.end(), u.speaker) == speakers.end()) speakers.push_back(u.speaker);
  }
  j["speakers"] = speakers;
  j["utterances"] = chosen.size();
  return j.dump();
}

}  // namespace whisperconv
